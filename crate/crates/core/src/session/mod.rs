//! Conversational authoring: a schema filled in node by node, each update
//! gated before it is committed, then lowered to a program.
//!
//! Proposals come from a [`ProposalProvider`]. The provider's own claim of
//! completeness is recorded but never trusted; every proposal is re-checked.

pub mod gates;
pub mod lower;
pub mod schema;

pub use gates::{check_node, validate_schema, CompletionReport, NodeId, NodeReport};
pub use lower::{lower, sanitize, AliasMap, Lowered};
pub use schema::{
    LayerEntry, LinkingEntry, SchemaVariable, SelectionEntry, SessionSchema, SliceLinkEntry,
    SourceEntry, TfLinkEntry, ViewEntry,
};

use crate::probe::{classify_file, probe_source, ProbeError};
use crate::value::{Object, Value};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateStatus {
    #[default]
    Enough,
    NotEnough,
}

/// Top-level schema fields to replace, as JSON.
pub type SchemaDelta = serde_json::Map<String, serde_json::Value>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    #[serde(default)]
    pub delta: SchemaDelta,
    #[serde(default)]
    pub claim: GateStatus,
}

/// Source of schema updates. Implementations see the schema only, which
/// carries variable names, types and dimensions but no data values.
pub trait ProposalProvider {
    fn propose(&mut self, node: NodeId, schema: &SessionSchema, turn: &str) -> Proposal;
}

/// Replays a fixed list of proposals in order; an exhausted script
/// proposes nothing.
#[derive(Debug, Clone, Default)]
pub struct ScriptedProvider {
    queue: VecDeque<Proposal>,
}

impl ScriptedProvider {
    pub fn new(proposals: impl IntoIterator<Item = Proposal>) -> Self {
        ScriptedProvider {
            queue: proposals.into_iter().collect(),
        }
    }
}

impl ProposalProvider for ScriptedProvider {
    fn propose(&mut self, _node: NodeId, _schema: &SessionSchema, _turn: &str) -> Proposal {
        self.queue.pop_front().unwrap_or_default()
    }
}

/// Provider with no model behind it: the summary is the user's first turn
/// and every other node gets an empty proposal.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoProvider;

impl ProposalProvider for EchoProvider {
    fn propose(&mut self, node: NodeId, _schema: &SessionSchema, turn: &str) -> Proposal {
        let mut delta = SchemaDelta::new();
        if node == NodeId::TaskDefinition {
            delta.insert("task_summary".into(), turn.into());
        }
        Proposal {
            delta,
            claim: GateStatus::Enough,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateResult {
    pub node: NodeId,
    pub status: GateStatus,
    /// Provider's own verdict, for the transcript.
    pub claimed: GateStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clarification: Option<String>,
    /// The node's part of the schema as committed; absent when nothing was
    /// committed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema_delta: Option<SchemaDelta>,
    /// Coordination items that were proposed but left out because they
    /// would not verify.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("no data uploaded")]
    NoData,
    #[error("upload `{0}` appears twice")]
    DuplicateUpload(String),
    #[error("upload `{name}`: {error}")]
    Upload { name: String, error: ProbeError },
    #[error("node {got:?} applied while the session is at {expected:?}")]
    OutOfOrder {
        expected: Option<NodeId>,
        got: NodeId,
    },
    #[error("schema is incomplete at node {0:?}")]
    Incomplete(NodeId),
}

/// An uploaded file. `path` is recorded in the schema as-is.
#[derive(Debug, Clone)]
pub struct Upload {
    pub name: String,
    pub path: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub schema: SessionSchema,
    cursor: Option<NodeId>,
}

/// Probes every upload into the data block. Any failure aborts: a session
/// cannot start without readable data.
pub fn init_session(uploads: &[Upload]) -> Result<Session, SessionError> {
    if uploads.is_empty() {
        return Err(SessionError::NoData);
    }
    let mut schema = SessionSchema::default();
    for upload in uploads {
        if schema.data.contains_key(&upload.name) {
            return Err(SessionError::DuplicateUpload(upload.name.clone()));
        }
        let wrap = |error| SessionError::Upload {
            name: upload.name.clone(),
            error,
        };
        let (ctor, format) = classify_file(&upload.name, &upload.bytes).map_err(wrap)?;
        let meta = probe_source(&upload.bytes, ctor, Some(format), &upload.name).map_err(wrap)?;
        let mut args = Object::new();
        args.push("format", Value::str(format));
        schema.data.insert(
            upload.name.clone(),
            SourceEntry::from_meta(ctor.name(), upload.path.clone(), args, &meta),
        );
    }
    Ok(Session::new(schema))
}

/// Fields each node may change.
fn scope(node: NodeId) -> &'static [&'static str] {
    match node {
        NodeId::TaskDefinition => &["task_summary"],
        NodeId::Data => &[],
        NodeId::ViewLayer | NodeId::Mark | NodeId::Encode => &["views"],
        NodeId::SelectionsLinking => &[
            "selections",
            "linking",
            "slice_linking",
            "tf_linking",
            "views",
        ],
    }
}

fn schema_value(schema: &SessionSchema) -> serde_json::Map<String, serde_json::Value> {
    match serde_json::to_value(schema).expect("schema serializes") {
        serde_json::Value::Object(m) => m,
        _ => unreachable!("schema is an object"),
    }
}

fn merged(
    schema: &SessionSchema,
    node: NodeId,
    delta: &SchemaDelta,
) -> serde_json::Result<SessionSchema> {
    let mut base = schema_value(schema);
    for key in scope(node) {
        if let Some(v) = delta.get(*key) {
            base.insert((*key).to_string(), v.clone());
        }
    }
    serde_json::from_value(serde_json::Value::Object(base))
}

/// Layer sources resolve to the only source when there is one, and view
/// ids are made unique.
fn normalize_views(schema: &mut SessionSchema) {
    if schema.data.len() == 1 {
        let only = schema.data.keys().next().cloned().unwrap_or_default();
        for layer in schema.views.iter_mut().flat_map(|v| v.layers.iter_mut()) {
            if !schema.data.contains_key(&layer.from) {
                layer.from = only.clone();
            }
        }
    }
    let mut seen = BTreeSet::new();
    for (i, view) in schema.views.iter_mut().enumerate() {
        if view.view_id.is_empty() {
            view.view_id = format!("view_{}", i + 1);
        }
        let base = view.view_id.clone();
        let mut n = 2;
        while !seen.insert(view.view_id.clone()) {
            view.view_id = format!("{base}_{n}");
            n += 1;
        }
    }
}

/// Keeps coordination items one group at a time, each only if the program
/// still verifies with it.
fn admit_coordination(
    base: &SessionSchema,
    proposed: &SessionSchema,
) -> (SessionSchema, Vec<String>) {
    let mut out = base.clone();
    out.selections.clear();
    out.linking = LinkingEntry::default();
    out.slice_linking.clear();
    out.tf_linking.clear();
    for v in &mut out.views {
        v.links_out.clear();
        v.interactions = Object::new();
    }
    let mut dropped = Vec::new();
    let mut try_add =
        |out: &mut SessionSchema, label: String, apply: &dyn Fn(&mut SessionSchema)| {
            let mut candidate = out.clone();
            apply(&mut candidate);
            if gates::lowered_diagnostics(&candidate).is_empty() {
                *out = candidate;
            } else {
                dropped.push(label);
            }
        };
    if !proposed.selections.is_empty() || !proposed.linking.is_empty() {
        try_add(&mut out, "selections and linking".into(), &|s| {
            s.selections = proposed.selections.clone();
            s.linking = proposed.linking.clone();
        });
    }
    for pv in &proposed.views {
        if pv.links_out.is_empty() && pv.interactions.is_empty() {
            continue;
        }
        try_add(
            &mut out,
            format!("links and interactions of view '{}'", pv.view_id),
            &|s| {
                if let Some(v) = s.views.iter_mut().find(|v| v.view_id == pv.view_id) {
                    v.links_out = pv.links_out.clone();
                    v.interactions = pv.interactions.clone();
                }
            },
        );
    }
    for entry in &proposed.slice_linking {
        try_add(
            &mut out,
            format!("slice link '{}'", entry.slice_link_id),
            &|s| s.slice_linking.push(entry.clone()),
        );
    }
    for entry in &proposed.tf_linking {
        try_add(
            &mut out,
            format!("transfer-function link '{}'", entry.tf_link_id),
            &|s| s.tf_linking.push(entry.clone()),
        );
    }
    (out, dropped)
}

fn node_slice(schema: &SessionSchema, node: NodeId) -> SchemaDelta {
    let full = schema_value(schema);
    scope(node)
        .iter()
        .filter_map(|k| Some(((*k).to_string(), full.get(*k)?.clone())))
        .collect()
}

/// Gates a proposal for `node` against `schema`. On success returns the
/// updated schema; otherwise the schema is to be left untouched.
pub fn apply_node(
    schema: &SessionSchema,
    node: NodeId,
    proposal: &Proposal,
    turn: &str,
) -> (GateResult, Option<SessionSchema>) {
    let not_enough = |clarification: String| GateResult {
        node,
        status: GateStatus::NotEnough,
        claimed: proposal.claim,
        clarification: Some(clarification),
        schema_delta: None,
        dropped: Vec::new(),
    };
    let mut candidate = match merged(schema, node, &proposal.delta) {
        Ok(c) => c,
        Err(e) => {
            return (
                not_enough(format!("The proposed update could not be read: {e}.")),
                None,
            )
        }
    };
    let mut dropped = Vec::new();
    match node {
        NodeId::TaskDefinition if candidate.task_summary.trim().is_empty() => {
            candidate.task_summary = turn.trim().to_string();
        }
        NodeId::ViewLayer | NodeId::Mark | NodeId::Encode => {
            // Views replaced at these nodes must not carry coordination.
            let coordination: Vec<_> = schema
                .views
                .iter()
                .map(|v| {
                    (
                        v.view_id.clone(),
                        v.links_out.clone(),
                        v.interactions.clone(),
                    )
                })
                .collect();
            normalize_views(&mut candidate);
            for view in &mut candidate.views {
                if let Some((_, l, i)) = coordination.iter().find(|(id, _, _)| *id == view.view_id)
                {
                    view.links_out = l.clone();
                    view.interactions = i.clone();
                }
            }
        }
        NodeId::SelectionsLinking => {
            // Only coordination fields of existing views may change here.
            let mut proposed = schema.clone();
            proposed.selections = candidate.selections.clone();
            proposed.linking = candidate.linking.clone();
            proposed.slice_linking = candidate.slice_linking.clone();
            proposed.tf_linking = candidate.tf_linking.clone();
            for view in &mut proposed.views {
                if let Some(pv) = candidate.views.iter().find(|p| p.view_id == view.view_id) {
                    view.links_out = pv.links_out.clone();
                    view.interactions = pv.interactions.clone();
                }
            }
            let (admitted, d) = admit_coordination(schema, &proposed);
            candidate = admitted;
            dropped = d;
        }
        _ => {}
    }
    let upto = NodeId::SEQUENCE.iter().take_while(|n| **n <= node);
    for n in upto {
        let report = check_node(&candidate, *n);
        if !report.pass {
            let text = report
                .clarification
                .unwrap_or_else(|| "More detail is needed.".into());
            return (not_enough(text), None);
        }
    }
    let result = GateResult {
        node,
        status: GateStatus::Enough,
        claimed: proposal.claim,
        clarification: None,
        schema_delta: Some(node_slice(&candidate, node)),
        dropped,
    };
    (result, Some(candidate))
}

impl Session {
    pub fn new(schema: SessionSchema) -> Self {
        Session {
            schema,
            cursor: Some(NodeId::TaskDefinition),
        }
    }

    /// Current node; `None` once every node has passed.
    pub fn cursor(&self) -> Option<NodeId> {
        self.cursor
    }

    pub fn is_complete(&self) -> bool {
        self.cursor.is_none()
    }

    /// Moves past nodes whose requirements already hold without input.
    /// Only the data node qualifies: uploads fill it at session start.
    fn settle(&mut self) {
        while self.cursor == Some(NodeId::Data) && check_node(&self.schema, NodeId::Data).pass {
            self.cursor = NodeId::Data.next();
        }
    }

    pub fn apply(
        &mut self,
        node: NodeId,
        proposal: &Proposal,
        turn: &str,
    ) -> Result<GateResult, SessionError> {
        if self.cursor != Some(node) {
            return Err(SessionError::OutOfOrder {
                expected: self.cursor,
                got: node,
            });
        }
        let (result, updated) = apply_node(&self.schema, node, proposal, turn);
        if let Some(schema) = updated {
            self.schema = schema;
            self.cursor = node.next();
            self.settle();
        }
        Ok(result)
    }

    /// Asks the provider for the current node and gates its answer.
    pub fn step(&mut self, provider: &mut dyn ProposalProvider, turn: &str) -> Option<GateResult> {
        let node = self.cursor?;
        let proposal = provider.propose(node, &self.schema, turn);
        self.apply(node, &proposal, turn).ok()
    }

    pub fn to_dsl(&self) -> Result<Lowered, SessionError> {
        schema_to_dsl(&self.schema)
    }
}

/// Lowers a complete schema. Fails on the first node that does not pass.
pub fn schema_to_dsl(schema: &SessionSchema) -> Result<Lowered, SessionError> {
    if let Some(failed) = validate_schema(schema).first_failure() {
        return Err(SessionError::Incomplete(failed.node));
    }
    Ok(lower(schema))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptEntry {
    pub user: String,
    pub result: GateResult,
}

/// Drives a session through user turns. After the script runs out,
/// remaining nodes get an empty turn so nodes that need no input still
/// complete.
pub fn run_turns(
    session: &mut Session,
    provider: &mut dyn ProposalProvider,
    turns: &[String],
) -> Vec<TranscriptEntry> {
    let mut transcript = Vec::new();
    for turn in turns {
        if let Some(result) = session.step(provider, turn) {
            transcript.push(TranscriptEntry {
                user: turn.clone(),
                result,
            });
        }
    }
    while let Some(node) = session.cursor() {
        match session.step(provider, "") {
            Some(result) if result.status == GateStatus::Enough => {
                transcript.push(TranscriptEntry {
                    user: String::new(),
                    result,
                })
            }
            Some(result) => {
                transcript.push(TranscriptEntry {
                    user: String::new(),
                    result,
                });
                break;
            }
            None => break,
        }
        if session.cursor() == Some(node) {
            break;
        }
    }
    transcript
}

/// A recorded conversation: uploads (paths relative to the script file)
/// and one proposal per user turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Script {
    pub uploads: Vec<String>,
    pub turns: Vec<ScriptTurn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptTurn {
    pub user: String,
    #[serde(default)]
    pub proposal: Proposal,
}

impl Script {
    pub fn provider(&self) -> ScriptedProvider {
        ScriptedProvider::new(self.turns.iter().map(|t| t.proposal.clone()))
    }

    pub fn user_turns(&self) -> Vec<String> {
        self.turns.iter().map(|t| t.user.clone()).collect()
    }
}
