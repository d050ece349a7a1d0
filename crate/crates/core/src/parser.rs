//! Bottom-up chart parsing over parser tags.
//!
//! Passive edges are packed: all derivations of the same category (name and
//! features) over the same span share one [`ChartNode`]. Active edges are
//! kept for inspection but play no role after parsing. No top-down filter is
//! applied, so the chart also holds every constituent that does not take part
//! in a complete parse; [`chunks`] relies on that.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write;
use std::rc::Rc;

use crate::resource::{Category, Features, Grammar};

/// Upper bound on the number of trees [`complete_parses`] enumerates.
pub const MAX_TREES: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("cannot parse an empty tag sequence")]
    EmptyInput,
    #[error("more than {limit} complete parses")]
    TooAmbiguous { limit: usize },
}

pub type NodeId = usize;

/// One way of building a chart node. `rule` is `None` for the input token itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub rule: Option<usize>,
    pub children: Vec<NodeId>,
}

/// A packed passive edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartNode {
    pub category: Category,
    pub start: usize,
    pub end: usize,
    pub derivations: Vec<Derivation>,
}

impl ChartNode {
    pub fn is_token(&self) -> bool {
        self.derivations.iter().any(|d| d.rule.is_none())
    }

    pub fn is_constituent(&self) -> bool {
        self.derivations.iter().any(|d| d.rule.is_some())
    }

    fn first_rule(&self) -> Option<usize> {
        self.derivations.iter().filter_map(|d| d.rule).min()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActiveEdge {
    pub rule: usize,
    pub start: usize,
    pub end: usize,
    /// Index of the next right-hand-side category needed.
    pub dot: usize,
    pub children: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct Chart {
    len: usize,
    nodes: Vec<ChartNode>,
    index: HashMap<(Category, usize, usize), NodeId>,
    by_start: Vec<Vec<NodeId>>,
    actives: Vec<ActiveEdge>,
    heads: Vec<usize>,
    exhausted: bool,
}

enum Item {
    Passive(NodeId),
    Active(usize),
}

struct ChartBuilder<'g> {
    grammar: &'g Grammar,
    chart: Chart,
    active_seen: HashSet<ActiveEdge>,
    actives_by_end: Vec<Vec<usize>>,
    agenda: VecDeque<Item>,
}

impl<'g> ChartBuilder<'g> {
    fn add_passive(&mut self, category: Category, start: usize, end: usize, derivation: Derivation) {
        let key = (category, start, end);
        if let Some(&id) = self.chart.index.get(&key) {
            let node = &mut self.chart.nodes[id];
            if !node.derivations.contains(&derivation) {
                node.derivations.push(derivation);
            }
            return;
        }
        let id = self.chart.nodes.len();
        self.chart.nodes.push(ChartNode {
            category: key.0.clone(),
            start,
            end,
            derivations: vec![derivation],
        });
        self.chart.index.insert(key, id);
        self.chart.by_start[start].push(id);
        self.agenda.push_back(Item::Passive(id));
    }

    fn add_active(&mut self, edge: ActiveEdge) {
        let rule = &self.grammar.rules[edge.rule];
        if edge.dot == rule.rhs.len() {
            let head = &self.chart.nodes[edge.children[rule.head]];
            let mut features: Features = head.category.features.clone();
            features.extend(rule.lhs.features.iter().map(|(k, v)| (k.clone(), v.clone())));
            let category = Category {
                name: rule.lhs.name.clone(),
                features,
            };
            let derivation = Derivation {
                rule: Some(edge.rule),
                children: edge.children,
            };
            self.add_passive(category, edge.start, edge.end, derivation);
            return;
        }
        if !self.active_seen.insert(edge.clone()) {
            return;
        }
        let id = self.chart.actives.len();
        self.actives_by_end[edge.end].push(id);
        self.chart.actives.push(edge);
        self.agenda.push_back(Item::Active(id));
    }

    fn extend(&self, active: &ActiveEdge, node: NodeId) -> Option<ActiveEdge> {
        let next = &self.grammar.rules[active.rule].rhs[active.dot];
        let passive = &self.chart.nodes[node];
        if passive.start != active.end || !next.matches(&passive.category) {
            return None;
        }
        let mut children = active.children.clone();
        children.push(node);
        Some(ActiveEdge {
            rule: active.rule,
            start: active.start,
            end: passive.end,
            dot: active.dot + 1,
            children,
        })
    }

    fn run(mut self) -> Chart {
        while let Some(item) = self.agenda.pop_front() {
            let mut new_edges = Vec::new();
            match item {
                Item::Passive(id) => {
                    let node = &self.chart.nodes[id];
                    for (r, rule) in self.grammar.rules.iter().enumerate() {
                        if rule.rhs[0].matches(&node.category) {
                            new_edges.push(ActiveEdge {
                                rule: r,
                                start: node.start,
                                end: node.end,
                                dot: 1,
                                children: vec![id],
                            });
                        }
                    }
                    for &a in &self.actives_by_end[node.start] {
                        new_edges.extend(self.extend(&self.chart.actives[a], id));
                    }
                }
                Item::Active(a) => {
                    let active = &self.chart.actives[a];
                    if active.end < self.chart.len {
                        for &id in &self.chart.by_start[active.end] {
                            new_edges.extend(self.extend(active, id));
                        }
                    }
                }
            }
            for edge in new_edges {
                self.add_active(edge);
            }
        }
        self.chart.exhausted = true;
        self.chart
    }
}

/// Parses a sequence of terminal categories (parser tag plus features).
pub fn parse(tags: &[Category], grammar: &Grammar) -> Result<Chart, ParseError> {
    if tags.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let n = tags.len();
    let mut builder = ChartBuilder {
        grammar,
        chart: Chart {
            len: n,
            nodes: Vec::new(),
            index: HashMap::new(),
            by_start: vec![Vec::new(); n + 1],
            actives: Vec::new(),
            heads: grammar.rules.iter().map(|r| r.head).collect(),
            exhausted: false,
        },
        active_seen: HashSet::new(),
        actives_by_end: vec![Vec::new(); n + 1],
        agenda: VecDeque::new(),
    };
    for (i, tag) in tags.iter().enumerate() {
        builder.add_passive(
            tag.clone(),
            i,
            i + 1,
            Derivation {
                rule: None,
                children: Vec::new(),
            },
        );
    }
    Ok(builder.run())
}

impl Chart {
    /// Number of input positions.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn nodes(&self) -> &[ChartNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &ChartNode {
        &self.nodes[id]
    }

    pub fn active_edges(&self) -> &[ActiveEdge] {
        &self.actives
    }

    /// Nodes starting at `start` whose category is named `name`.
    pub fn edges_at<'a>(&'a self, start: usize, name: &'a str) -> impl Iterator<Item = NodeId> + 'a {
        self.by_start
            .get(start)
            .into_iter()
            .flatten()
            .copied()
            .filter(move |&id| self.nodes[id].category.name == name)
    }

    /// `(name, start, end)` of every passive edge, token edges included.
    pub fn passive_spans(&self) -> std::collections::BTreeSet<(String, usize, usize)> {
        self.nodes
            .iter()
            .map(|n| (n.category.name.clone(), n.start, n.end))
            .collect()
    }

    /// Derivations in enumeration order: by rule, then by child spans.
    fn ordered_derivations(&self, id: NodeId) -> Vec<&Derivation> {
        let mut ds: Vec<&Derivation> = self.nodes[id].derivations.iter().collect();
        ds.sort_by_key(|d| {
            let spans: Vec<(usize, usize)> = d.children.iter().map(|&c| (self.nodes[c].start, self.nodes[c].end)).collect();
            (d.rule, spans)
        });
        ds
    }

    fn spanning(&self, name: &str) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .edges_at(0, name)
            .filter(|&id| self.nodes[id].end == self.len && self.nodes[id].is_constituent())
            .collect();
        ids.sort_by(|a, b| self.nodes[*a].category.cmp(&self.nodes[*b].category));
        ids
    }

    fn make_tree(&self, id: NodeId, derivation: &Derivation, children: Vec<ParseTree>) -> ParseTree {
        let node = &self.nodes[id];
        ParseTree {
            category: node.category.clone(),
            start: node.start,
            end: node.end,
            rule: derivation.rule,
            head: derivation.rule.map_or(0, |r| self.heads[r]),
            children,
        }
    }

    /// First tree of a node in enumeration order, skipping derivations that
    /// would revisit a node already on the path.
    fn first_tree(&self, id: NodeId, path: &mut Vec<NodeId>) -> Option<ParseTree> {
        path.push(id);
        let mut result = None;
        'derivations: for d in self.ordered_derivations(id) {
            if d.children.iter().any(|c| path.contains(c)) {
                continue;
            }
            let mut children = Vec::with_capacity(d.children.len());
            for &c in &d.children {
                match self.first_tree(c, path) {
                    Some(t) => children.push(t),
                    None => continue 'derivations,
                }
            }
            result = Some(self.make_tree(id, d, children));
            break;
        }
        path.pop();
        result
    }

    fn all_trees(
        &self,
        id: NodeId,
        path: &mut Vec<NodeId>,
        memo: &mut HashMap<NodeId, Rc<Vec<ParseTree>>>,
    ) -> Result<Rc<Vec<ParseTree>>, ParseError> {
        if let Some(trees) = memo.get(&id) {
            return Ok(trees.clone());
        }
        path.push(id);
        let mut out = Vec::new();
        for d in self.ordered_derivations(id) {
            if d.children.iter().any(|c| path.contains(c)) {
                continue;
            }
            let mut options = Vec::with_capacity(d.children.len());
            for &c in &d.children {
                options.push(self.all_trees(c, path, memo)?);
            }
            // cartesian product, first child varying slowest
            let mut partial: Vec<Vec<ParseTree>> = vec![Vec::new()];
            for opts in &options {
                let mut next = Vec::with_capacity(partial.len() * opts.len());
                for prefix in &partial {
                    for t in opts.iter() {
                        let mut v = prefix.clone();
                        v.push(t.clone());
                        next.push(v);
                    }
                }
                if next.len() > MAX_TREES {
                    path.pop();
                    return Err(ParseError::TooAmbiguous { limit: MAX_TREES });
                }
                partial = next;
            }
            for children in partial {
                out.push(self.make_tree(id, d, children));
            }
            if out.len() > MAX_TREES {
                path.pop();
                return Err(ParseError::TooAmbiguous { limit: MAX_TREES });
            }
        }
        path.pop();
        let out = Rc::new(out);
        memo.insert(id, out.clone());
        Ok(out)
    }
}

/// Every tree of `start_symbol` over the whole input, in deterministic order.
/// Fails with [`ParseError::TooAmbiguous`] beyond [`MAX_TREES`] trees.
pub fn complete_parses(chart: &Chart, start_symbol: &str) -> Result<Vec<ParseTree>, ParseError> {
    let mut memo = HashMap::new();
    let mut out = Vec::new();
    for id in chart.spanning(start_symbol) {
        let trees = chart.all_trees(id, &mut Vec::new(), &mut memo)?;
        out.extend(trees.iter().cloned());
        if out.len() > MAX_TREES {
            return Err(ParseError::TooAmbiguous { limit: MAX_TREES });
        }
    }
    Ok(out)
}

/// The first tree [`complete_parses`] would return, without enumerating the rest.
pub fn first_complete_parse(chart: &Chart, start_symbol: &str) -> Option<ParseTree> {
    chart
        .spanning(start_symbol)
        .into_iter()
        .find_map(|id| chart.first_tree(id, &mut Vec::new()))
}

/// Greedy left-to-right cover by the longest constituent starting at each
/// position (ties go to the earlier grammar rule); positions no constituent
/// starts at become single-token leaves.
pub fn chunks(chart: &Chart) -> Vec<ParseTree> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < chart.len {
        let best = chart.by_start[pos]
            .iter()
            .copied()
            .filter(|&id| chart.nodes[id].is_constituent())
            .min_by_key(|&id| {
                let n = &chart.nodes[id];
                (std::cmp::Reverse(n.end), n.first_rule(), id)
            });
        let tree = best.and_then(|id| chart.first_tree(id, &mut Vec::new()));
        match tree {
            Some(t) => {
                pos = t.end;
                out.push(t);
            }
            None => {
                let leaf = chart.by_start[pos]
                    .iter()
                    .copied()
                    .find(|&id| chart.nodes[id].is_token())
                    .expect("every position has a token edge");
                let node = &chart.nodes[leaf];
                out.push(ParseTree::leaf(node.category.clone(), pos));
                pos += 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub category: Category,
    pub start: usize,
    pub end: usize,
    /// Grammar rule that built this node; `None` for leaves.
    pub rule: Option<usize>,
    /// Index of the head child.
    pub head: usize,
    pub children: Vec<ParseTree>,
}

impl ParseTree {
    pub fn leaf(category: Category, position: usize) -> Self {
        ParseTree {
            category,
            start: position,
            end: position + 1,
            rule: None,
            head: 0,
            children: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn name(&self) -> &str {
        &self.category.name
    }

    /// Position of the token reached by following head children down.
    pub fn head_token(&self) -> usize {
        let mut node = self;
        while let Some(child) = node.children.get(node.head) {
            node = child;
        }
        node.start
    }

    /// Leaf positions, left to right.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if t.is_leaf() {
                out.push(t.start);
            }
        });
        out
    }

    /// Visits nodes in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a ParseTree)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn preorder(&self) -> Vec<&ParseTree> {
        let mut out = Vec::new();
        self.walk(&mut |t| out.push(t));
        out
    }

    /// Bracketed rendering. Leaves print as `(N word)` when `forms` is given
    /// (indexed by position), otherwise as the bare category.
    pub fn render(&self, forms: Option<&[&str]>) -> String {
        let mut out = String::new();
        self.render_into(forms, &mut out);
        out
    }

    fn render_into(&self, forms: Option<&[&str]>, out: &mut String) {
        if self.is_leaf() {
            match forms.and_then(|f| f.get(self.start)) {
                Some(word) => {
                    let _ = write!(out, "({} {word})", self.category);
                }
                None => {
                    let _ = write!(out, "{}", self.category);
                }
            }
            return;
        }
        let _ = write!(out, "({}", self.category);
        for c in &self.children {
            out.push(' ');
            c.render_into(forms, out);
        }
        out.push(')');
    }
}

/// Number of distinct complete parses per spanning category, without building trees.
pub fn count_derivations(chart: &Chart, start_symbol: &str) -> u128 {
    fn count(chart: &Chart, id: NodeId, path: &mut Vec<NodeId>, memo: &mut BTreeMap<NodeId, u128>) -> u128 {
        if let Some(&c) = memo.get(&id) {
            return c;
        }
        path.push(id);
        let mut total: u128 = 0;
        for d in &chart.nodes[id].derivations {
            if d.children.iter().any(|c| path.contains(c)) {
                continue;
            }
            let mut product: u128 = 1;
            for &c in &d.children {
                product = product.saturating_mul(count(chart, c, path, memo));
            }
            total = total.saturating_add(product);
        }
        path.pop();
        memo.insert(id, total);
        total
    }
    let mut memo = BTreeMap::new();
    chart
        .spanning(start_symbol)
        .into_iter()
        .map(|id| count(chart, id, &mut Vec::new(), &mut memo))
        .fold(0, u128::saturating_add)
}
