//! Worst-case schedules on line networks and per-chunk flow capacities.
//!
//! A schedule is an explicit, globally ordered list of traffic events. Each
//! event is one successful transmission over a link; the packet it carries
//! is handed to the receiving node later, in `arrival_rank` order, as soon
//! as every lower-ranked packet of that link is also in flight. The global
//! position right after which an event's packet becomes available at the
//! receiving node is its *delivery position*; everything downstream (trial
//! replay, ω-capacity) keys off those positions.

use crate::gf2::BitMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// Each interior node transmits one packet between contiguous arrivals.
    OneInOneOut,
    /// Each interior node transmits only after receiving all n packets.
    AllInAllOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryOrder {
    InOrder,
    RandomPermutation,
}

/// One successful transmission: the `slot`-th packet sent on `link`,
/// arriving as the `arrival_rank`-th packet at the receiving node.
/// All three fields are 1-based, matching the text serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub link: usize,
    pub slot: usize,
    pub arrival_rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub l: usize,
    pub n: usize,
    pub delivery_order: DeliveryOrder,
    pub events: Vec<Event>,
    delivery_pos: Vec<usize>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("chunk assignment has {got} entries for {expected} events")]
    AssignmentLength { expected: usize, got: usize },
    #[error("transfer matrix needs d <= n (d={d}, n={n})")]
    TransferShape { n: usize, d: usize },
    #[error("schedule text line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Schedule {
    /// Global position right after which each event's packet is available
    /// at the receiving node (indexed like `events`).
    pub fn delivery_pos(&self) -> &[usize] {
        &self.delivery_pos
    }

    /// Event indices delivered right after each global position.
    pub fn deliveries_by_position(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.events.len()];
        for (idx, &p) in self.delivery_pos.iter().enumerate() {
            groups[p].push(idx);
        }
        groups
    }

    /// One event per line: `link slot arrival_rank [chunk]`.
    pub fn to_text(&self, assignment: Option<&[usize]>) -> String {
        let mut out = String::new();
        for (idx, e) in self.events.iter().enumerate() {
            match assignment {
                Some(a) => out.push_str(&format!(
                    "{} {} {} {}\n",
                    e.link, e.slot, e.arrival_rank, a[idx]
                )),
                None => out.push_str(&format!("{} {} {}\n", e.link, e.slot, e.arrival_rank)),
            }
        }
        out
    }

    /// Parse the text form. The kind is inferred: a link-blocked event list
    /// (all of link 1, then all of link 2, ...) reads as all-in-all-out,
    /// anything else as one-in-one-out.
    pub fn from_text(text: &str) -> Result<(Schedule, Option<Vec<usize>>), NetworkError> {
        let mut events = Vec::new();
        let mut chunks: Vec<usize> = Vec::new();
        let mut any_chunk = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 3 && fields.len() != 4 {
                return Err(NetworkError::Parse {
                    line,
                    reason: format!("expected 3 or 4 fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| NetworkError::Parse {
                    line,
                    reason: format!("not a nonnegative integer: {s:?}"),
                })
            };
            events.push(Event {
                link: parse(fields[0])?,
                slot: parse(fields[1])?,
                arrival_rank: parse(fields[2])?,
            });
            if fields.len() == 4 {
                any_chunk = true;
                chunks.push(parse(fields[3])?);
            } else {
                chunks.push(0);
            }
        }
        if events.is_empty() {
            return Err(NetworkError::Parse {
                line: 0,
                reason: "no events".to_string(),
            });
        }
        let l = events.iter().map(|e| e.link).max().unwrap();
        if events.len() % l != 0 {
            return Err(NetworkError::Parse {
                line: 0,
                reason: format!("{} events do not split evenly over {} links", events.len(), l),
            });
        }
        let n = events.len() / l;
        for link in 1..=l {
            let mut slots = vec![false; n + 1];
            let mut ranks = vec![false; n + 1];
            for e in events.iter().filter(|e| e.link == link) {
                if e.slot == 0 || e.slot > n || std::mem::replace(&mut slots[e.slot], true) {
                    return Err(NetworkError::Parse {
                        line: 0,
                        reason: format!("link {link}: slots are not a permutation of 1..={n}"),
                    });
                }
                if e.arrival_rank == 0
                    || e.arrival_rank > n
                    || std::mem::replace(&mut ranks[e.arrival_rank], true)
                {
                    return Err(NetworkError::Parse {
                        line: 0,
                        reason: format!("link {link}: arrival ranks are not a permutation of 1..={n}"),
                    });
                }
            }
        }
        let blocked = events
            .iter()
            .enumerate()
            .all(|(i, e)| e.link == i / n + 1);
        let kind = if blocked && l > 1 {
            ScheduleKind::AllInAllOut
        } else {
            ScheduleKind::OneInOneOut
        };
        let order = if events.iter().all(|e| e.arrival_rank == e.slot) {
            DeliveryOrder::InOrder
        } else {
            DeliveryOrder::RandomPermutation
        };
        let delivery_pos = compute_delivery_positions(&events, l, n);
        Ok((
            Schedule {
                kind,
                l,
                n,
                delivery_order: order,
                events,
                delivery_pos,
            },
            any_chunk.then_some(chunks),
        ))
    }
}

/// Replay the event list and record, for each event, the global position
/// right after which its packet is delivered: packets on a link are handed
/// over strictly in arrival-rank order, each as soon as it and every
/// lower-ranked packet have been transmitted.
fn compute_delivery_positions(events: &[Event], l: usize, n: usize) -> Vec<usize> {
    // slot_of_rank[link][rank-1] = slot; event_of_slot[link][slot-1] = index
    let mut slot_of_rank = vec![vec![0usize; n]; l + 1];
    let mut event_of_slot = vec![vec![0usize; n]; l + 1];
    for (idx, e) in events.iter().enumerate() {
        slot_of_rank[e.link][e.arrival_rank - 1] = e.slot;
        event_of_slot[e.link][e.slot - 1] = idx;
    }
    let mut sent = vec![vec![false; n + 1]; l + 1];
    let mut next_rank = vec![0usize; l + 1];
    let mut delivery_pos = vec![0usize; events.len()];
    for (pos, e) in events.iter().enumerate() {
        sent[e.link][e.slot] = true;
        while next_rank[e.link] < n && sent[e.link][slot_of_rank[e.link][next_rank[e.link]]] {
            let slot = slot_of_rank[e.link][next_rank[e.link]];
            delivery_pos[event_of_slot[e.link][slot - 1]] = pos;
            next_rank[e.link] += 1;
        }
    }
    delivery_pos
}

/// Build a worst-case schedule of capacity n on a line of l links.
///
/// One-in-one-out interleaves round-robin over the links: in every round
/// each link transmits once if its sender already holds an undelivered
/// packet (the source always does). All-in-all-out empties each link
/// completely before the next one starts.
pub fn generate_schedule(
    kind: ScheduleKind,
    l: usize,
    n: usize,
    order: DeliveryOrder,
    rng: &mut impl Rng,
) -> Schedule {
    assert!(l >= 1 && n >= 1, "need l >= 1 and n >= 1");
    let ranks: Vec<Vec<usize>> = (0..=l)
        .map(|_| {
            let mut p: Vec<usize> = (1..=n).collect();
            if order == DeliveryOrder::RandomPermutation {
                p.shuffle(rng);
            }
            p
        })
        .collect();

    let mut events = Vec::with_capacity(l * n);
    match kind {
        ScheduleKind::AllInAllOut => {
            for link in 1..=l {
                for slot in 1..=n {
                    events.push(Event {
                        link,
                        slot,
                        arrival_rank: ranks[link][slot - 1],
                    });
                }
            }
        }
        ScheduleKind::OneInOneOut => {
            // delivered[i] counts arrivals completed at the receiving node
            // of link i; a link may transmit while its sender is ahead.
            let mut slot_of_rank = vec![vec![0usize; n + 1]; l + 1];
            for link in 1..=l {
                for (i, &r) in ranks[link].iter().enumerate() {
                    slot_of_rank[link][r] = i + 1;
                }
            }
            let mut sent = vec![0usize; l + 1];
            let mut delivered = vec![0usize; l + 1];
            let mut in_flight = vec![vec![false; n + 1]; l + 1];
            let mut next_rank = vec![1usize; l + 1];
            while sent[l] < n {
                for link in 1..=l {
                    if sent[link] == n || (link > 1 && sent[link] >= delivered[link - 1]) {
                        continue;
                    }
                    sent[link] += 1;
                    let slot = sent[link];
                    events.push(Event {
                        link,
                        slot,
                        arrival_rank: ranks[link][slot - 1],
                    });
                    in_flight[link][slot] = true;
                    while next_rank[link] <= n && in_flight[link][slot_of_rank[link][next_rank[link]]] {
                        next_rank[link] += 1;
                        delivered[link] += 1;
                    }
                }
            }
        }
    }
    let delivery_pos = compute_delivery_positions(&events, l, n);
    Schedule {
        kind,
        l,
        n,
        delivery_order: order,
        events,
        delivery_pos,
    }
}

const INF: u64 = u64::MAX / 2;

struct FlowGraph {
    // forward-star adjacency; each edge stores (to, residual cap, rev idx)
    adj: Vec<Vec<(usize, u64, usize)>>,
}

impl FlowGraph {
    fn new(n_nodes: usize) -> Self {
        FlowGraph {
            adj: vec![Vec::new(); n_nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: u64) {
        let ri = self.adj[to].len();
        let fi = self.adj[from].len();
        self.adj[from].push((to, cap, ri));
        self.adj[to].push((from, 0, fi));
    }

    /// Edmonds-Karp: breadth-first augmenting paths until none remain.
    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let mut flow = 0;
        loop {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(s);
            prev[s] = Some((s, usize::MAX));
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (i, &(v, cap, _)) in self.adj[u].iter().enumerate() {
                    if cap > 0 && prev[v].is_none() {
                        prev[v] = Some((u, i));
                        queue.push_back(v);
                    }
                }
            }
            if prev[t].is_none() {
                return flow;
            }
            let mut bottleneck = INF;
            let mut v = t;
            while v != s {
                let (u, i) = prev[v].unwrap();
                bottleneck = bottleneck.min(self.adj[u][i].1);
                v = u;
            }
            let mut v = t;
            while v != s {
                let (u, i) = prev[v].unwrap();
                self.adj[u][i].1 -= bottleneck;
                let rev = self.adj[u][i].2;
                self.adj[v][rev].1 += bottleneck;
                v = u;
            }
            flow += bottleneck;
        }
    }
}

/// Capacity of the ω-schedule: the maximum number of edge-disjoint
/// source→sink paths in the trellis restricted to ω-assigned traffic edges
/// (memory edges have infinite capacity).
///
/// For all-in-all-out schedules this equals the minimum per-link ω-count
/// and is computed by that rule; other kinds run max-flow on the trellis.
pub fn omega_capacity(
    schedule: &Schedule,
    assignment: &[usize],
    omega: usize,
) -> Result<usize, NetworkError> {
    if assignment.len() != schedule.events.len() {
        return Err(NetworkError::AssignmentLength {
            expected: schedule.events.len(),
            got: assignment.len(),
        });
    }
    if schedule.kind == ScheduleKind::AllInAllOut {
        let min = (1..=schedule.l)
            .map(|link| {
                schedule
                    .events
                    .iter()
                    .zip(assignment)
                    .filter(|(e, &c)| e.link == link && c == omega)
                    .count()
            })
            .min()
            .unwrap();
        return Ok(min);
    }
    omega_capacity_maxflow(schedule, assignment, omega)
}

/// The max-flow path, usable on any kind (cross-checks the min rule).
pub fn omega_capacity_maxflow(
    schedule: &Schedule,
    assignment: &[usize],
    omega: usize,
) -> Result<usize, NetworkError> {
    if assignment.len() != schedule.events.len() {
        return Err(NetworkError::AssignmentLength {
            expected: schedule.events.len(),
            got: assignment.len(),
        });
    }
    let l = schedule.l;
    // ω-events per link, with transmit and delivery positions.
    let mut per_link: Vec<Vec<(usize, usize)>> = vec![Vec::new(); l + 1];
    for (idx, e) in schedule.events.iter().enumerate() {
        if assignment[idx] == omega {
            per_link[e.link].push((idx, schedule.delivery_pos[idx]));
        }
    }
    // Memory chain per interior node: one trellis node per relevant time
    // point (deliveries into the node, transmit slots out of it).
    // Node ids: 0 = source, 1 = sink, then chain nodes.
    let mut times: Vec<Vec<usize>> = vec![Vec::new(); l]; // interior nodes 1..l-1
    for node in 1..l {
        let mut ts: Vec<usize> = per_link[node].iter().map(|&(_, dp)| dp).collect();
        ts.extend(per_link[node + 1].iter().map(|&(idx, _)| idx));
        ts.sort_unstable();
        ts.dedup();
        times[node] = ts;
    }
    let mut base = vec![0usize; l];
    let mut next_id = 2usize;
    for node in 1..l {
        base[node] = next_id;
        next_id += times[node].len();
    }
    let chain_node = |node: usize, time: usize, times: &[Vec<usize>], base: &[usize]| {
        base[node] + times[node].binary_search(&time).unwrap()
    };
    let mut g = FlowGraph::new(next_id);
    for node in 1..l {
        for w in 0..times[node].len().saturating_sub(1) {
            g.add_edge(base[node] + w, base[node] + w + 1, INF);
        }
    }
    for link in 1..=l {
        for &(idx, dp) in &per_link[link] {
            let tail = if link == 1 {
                0
            } else {
                chain_node(link - 1, idx, &times, &base)
            };
            let head = if link == l {
                1
            } else {
                chain_node(link, dp, &times, &base)
            };
            g.add_edge(tail, head, 1);
        }
    }
    Ok(g.max_flow(0, 1) as usize)
}

/// Sample an n×d sink transfer matrix directly from the schedule-kind law:
/// all-in-all-out gives fully i.u.d. entries; one-in-one-out confines row i
/// (1-based) to its first [i−n+d]⁺ columns, so column j is i.u.d. exactly
/// in its last d−j+1 positions.
pub fn sample_transfer_matrix(
    n: usize,
    d: usize,
    kind: ScheduleKind,
    rng: &mut impl Rng,
) -> Result<BitMatrix, NetworkError> {
    if d > n {
        return Err(NetworkError::TransferShape { n, d });
    }
    let mut m = BitMatrix::zero(n, d);
    for i in 0..n {
        let width = match kind {
            ScheduleKind::AllInAllOut => d,
            // row i+1 gets its first (i+1) - n + d entries, clamped at 0
            ScheduleKind::OneInOneOut => (i + 1 + d).saturating_sub(n).min(d),
        };
        for j in 0..width {
            if rng.gen::<bool>() {
                m.set(i, j, true);
            }
        }
    }
    Ok(m)
}
