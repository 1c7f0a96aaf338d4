(function () {
  "use strict";
  var irNode = document.getElementById("visdsl-ir");
  var dataNode = document.getElementById("visdsl-data");
  var ir = JSON.parse(irNode.textContent);
  var payloads = dataNode ? JSON.parse(dataNode.textContent) : {};

  function decode(entry) {
    if (entry.mode === "inline-base64") {
      var bin = atob(entry.data);
      var bytes = new Uint8Array(bin.length);
      for (var i = 0; i < bin.length; i++) bytes[i] = bin.charCodeAt(i);
      return Promise.resolve(bytes.buffer);
    }
    if (entry.mode === "inline-text") return Promise.resolve(entry.data);
    return fetch(entry.url).then(function (r) { return r.arrayBuffer(); });
  }

  function source(name) {
    var entry = payloads[name];
    return entry ? decode(entry) : Promise.reject(new Error("no data for " + name));
  }

  ir.views.forEach(function (view) {
    var cell = document.querySelector('[data-view-id="' + CSS.escape(view.viewId) + '"]');
    if (!cell) return;
    var title = document.createElement("h2");
    title.textContent = view.viewId;
    cell.appendChild(title);
    var list = document.createElement("ul");
    view.layers.forEach(function (layer) {
      var item = document.createElement("li");
      item.textContent = layer.type + " ← " + layer.from;
      list.appendChild(item);
    });
    cell.appendChild(list);
  });

  window.visdsl = { ir: ir, source: source, renderers: {} };
  document.dispatchEvent(new CustomEvent("visdsl:ready", { detail: window.visdsl }));
})();
