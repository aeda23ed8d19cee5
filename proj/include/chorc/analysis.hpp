#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chorc/semantics.hpp"
#include "chorc/syntax.hpp"

namespace chorc {

// ---------------------------------------------------------------------------
// Initial and final interactions (transI / transF)
// ---------------------------------------------------------------------------

using InteractionAt = std::pair<Path, Interaction>;

namespace detail {

inline void trans_i_rec(const ChorPtr& c, Path& prefix, std::vector<InteractionAt>& out) {
  switch (c->kind) {
    case ChorKind::Interaction:
      out.emplace_back(prefix, c->inter);
      break;
    case ChorKind::One:
    case ChorKind::Zero:
      break;
    case ChorKind::Par:
    case ChorKind::Choice:
      prefix.push_back(Step::Left);
      trans_i_rec(c->left, prefix, out);
      prefix.back() = Step::Right;
      trans_i_rec(c->right, prefix, out);
      prefix.pop_back();
      break;
    case ChorKind::Seq:
      prefix.push_back(Step::Left);
      trans_i_rec(c->left, prefix, out);
      if (can_tick(c->left)) {
        prefix.back() = Step::Right;
        trans_i_rec(c->right, prefix, out);
      }
      prefix.pop_back();
      break;
  }
}

inline void trans_f_rec(const ChorPtr& c, Path& prefix, std::vector<InteractionAt>& out) {
  switch (c->kind) {
    case ChorKind::Interaction:
      out.emplace_back(prefix, c->inter);
      break;
    case ChorKind::One:
    case ChorKind::Zero:
      break;
    case ChorKind::Par:
    case ChorKind::Choice:
      prefix.push_back(Step::Left);
      trans_f_rec(c->left, prefix, out);
      prefix.back() = Step::Right;
      trans_f_rec(c->right, prefix, out);
      prefix.pop_back();
      break;
    case ChorKind::Seq:
      prefix.push_back(Step::Right);
      trans_f_rec(c->right, prefix, out);
      if (can_tick(c->right)) {
        prefix.back() = Step::Left;
        trans_f_rec(c->left, prefix, out);
      }
      prefix.pop_back();
      break;
  }
}

}  // namespace detail

inline std::vector<InteractionAt> trans_i(const ChorPtr& c) {
  std::vector<InteractionAt> out;
  Path prefix;
  detail::trans_i_rec(c, prefix, out);
  return out;
}

inline std::vector<InteractionAt> trans_f(const ChorPtr& c) {
  std::vector<InteractionAt> out;
  Path prefix;
  detail::trans_f_rec(c, prefix, out);
  return out;
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

enum class Polarity { Send, Receive };

// One half of an interaction occurrence: the send at the sender or the
// receive at the receiver, identified by the leaf's address.
struct Event {
  Path interaction_path;
  Polarity polarity;
  Role role;
  Operation op;

  friend auto operator<=>(const Event&, const Event&) = default;
};

// Leaf k owns event indices 2k (send) and 2k+1 (receive).
struct EventSpace {
  std::vector<InteractionAt> interaction_leaves;  // DFS left-to-right
  std::vector<Event> events;

  std::size_t size() const { return events.size(); }
  static std::size_t send_index(std::size_t leaf) { return 2 * leaf; }
  static std::size_t receive_index(std::size_t leaf) { return 2 * leaf + 1; }
};

inline EventSpace event_space(const ChorPtr& c) {
  EventSpace es;
  es.interaction_leaves = leaves(c);
  es.events.reserve(2 * es.interaction_leaves.size());
  for (const auto& [p, i] : es.interaction_leaves) {
    es.events.push_back(Event{p, Polarity::Send, i.sender, i.op});
    es.events.push_back(Event{p, Polarity::Receive, i.receiver, i.op});
  }
  return es;
}

inline std::vector<Event> events(const ChorPtr& c) { return event_space(c).events; }

// ---------------------------------------------------------------------------
// Bit-packed square boolean matrix
// ---------------------------------------------------------------------------

class BitMatrix {
 public:
  explicit BitMatrix(std::size_t n = 0)
      : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  // rectangular: `rows` rows of `cols` columns
  BitMatrix(std::size_t rows, std::size_t cols)
      : n_(rows), words_((cols + 63) / 64), bits_(rows * words_, 0) {}

  std::size_t size() const { return n_; }

  void clear_row(std::size_t i) {
    std::fill_n(bits_.begin() + static_cast<std::ptrdiff_t>(i * words_), words_, 0);
  }

  bool get(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1u;
  }
  void set(std::size_t i, std::size_t j) {
    bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64);
  }

  // row(i) |= row(j); returns true if row(i) changed.
  bool or_row(std::size_t i, std::size_t j) { return or_row_from(i, *this, j); }

  // row(i) |= other.row(j); returns true if row(i) changed.
  bool or_row_from(std::size_t i, const BitMatrix& other, std::size_t j) {
    bool changed = false;
    std::uint64_t* dst = &bits_[i * words_];
    const std::uint64_t* src = &other.bits_[j * other.words_];
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t next = dst[w] | src[w];
      if (next != dst[w]) {
        dst[w] = next;
        changed = true;
      }
    }
    return changed;
  }

  bool row_any(std::size_t i) const {
    for (std::size_t w = 0; w < words_; ++w)
      if (bits_[i * words_ + w]) return true;
    return false;
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

// ---------------------------------------------------------------------------
// Causality and full-conflict relations
// ---------------------------------------------------------------------------

// A binary relation over the event space, addressable by event index or by
// the events themselves.
struct EventRelation {
  EventSpace space;
  BitMatrix matrix;

  bool contains(std::size_t i, std::size_t j) const { return matrix.get(i, j); }

  std::set<std::pair<Event, Event>> pairs() const {
    std::set<std::pair<Event, Event>> out;
    for (std::size_t i = 0; i < space.size(); ++i)
      for (std::size_t j = 0; j < space.size(); ++j)
        if (matrix.get(i, j)) out.insert({space.events[i], space.events[j]});
    return out;
  }
};

namespace detail {

// Leaf index range [first, last) covered by each subterm, via DFS.
inline void for_each_internal_node(
    const ChorPtr& c, Path& prefix, std::size_t& next_leaf,
    const std::function<void(const ChorPtr&, const Path&, std::size_t, std::size_t,
                             std::size_t)>& visit) {
  // visit(node, path, left_begin, mid, right_end) for binary nodes
  switch (c->kind) {
    case ChorKind::Interaction:
      ++next_leaf;
      return;
    case ChorKind::One:
    case ChorKind::Zero:
      return;
    default: {
      std::size_t begin = next_leaf;
      prefix.push_back(Step::Left);
      for_each_internal_node(c->left, prefix, next_leaf, visit);
      std::size_t mid = next_leaf;
      prefix.back() = Step::Right;
      for_each_internal_node(c->right, prefix, next_leaf, visit);
      prefix.pop_back();
      visit(c, prefix, begin, mid, next_leaf);
      return;
    }
  }
}

// Direct sequentiality successors per event. Every edge points at a later
// leaf, so the graph is ordered by event index; a send borrows the edge list
// of its own receive (synchronization: r <= e implies co(r) <= e).
inline std::vector<std::vector<std::uint32_t>> sequentiality_edges(const EventSpace& es,
                                                                   const ChorPtr& c) {
  std::vector<std::vector<std::uint32_t>> out(es.size());
  Path prefix;
  std::size_t next_leaf = 0;
  std::function<void(const ChorPtr&, const Path&, std::size_t, std::size_t, std::size_t)>
      visit = [&](const ChorPtr& node, const Path&, std::size_t begin, std::size_t mid,
                  std::size_t end) {
        if (node->kind != ChorKind::Seq) return;
        for (std::size_t k = begin; k < mid; ++k) {
          const Role& role = es.interaction_leaves[k].second.receiver;
          std::size_t r = EventSpace::receive_index(k);
          for (std::size_t l = mid; l < end; ++l) {
            const Interaction& i = es.interaction_leaves[l].second;
            if (i.sender == role)
              out[r].push_back(static_cast<std::uint32_t>(EventSpace::send_index(l)));
            if (i.receiver == role)
              out[r].push_back(static_cast<std::uint32_t>(EventSpace::receive_index(l)));
          }
        }
      };
  detail::for_each_internal_node(c, prefix, next_leaf, visit);
  return out;
}

}  // namespace detail

// Least partial order closed under the sequentiality and synchronization
// clauses. All generating edges point from an event to one in a later leaf,
// so one pass in decreasing event order yields the transitive closure; the
// reflexive pairs are added afterwards.
inline EventRelation causality(const ChorPtr& c) {
  EventSpace es = event_space(c);
  std::size_t n = es.size();
  BitMatrix m(n);
  auto edges = detail::sequentiality_edges(es, c);

  for (std::size_t i = n; i-- > 0;) {
    for (std::uint32_t j : edges[i]) {
      m.set(i, j);
      m.or_row(i, j);
    }
    // synchronization: the send reaches whatever its receive strictly
    // reaches. The send does not precede its own receive: the worked
    // amendment sequences rely on the strict reading, where a causal chain
    // cannot cross an interaction from its send to its receive.
    if (i % 2 == 0) m.or_row(i, i + 1);
  }
  for (std::size_t i = 0; i < n; ++i) m.set(i, i);
  return EventRelation{std::move(es), std::move(m)};
}

// Smallest symmetric relation containing the choice base pairs and closed
// rightward under causality: e # f iff some base pair (a, b) has a <= e and
// b <= f. Computed as base rows widened by the up-sets of their partners,
// then swept forward along the sequentiality graph.
inline EventRelation full_conflict(const ChorPtr& c, const EventRelation& leq) {
  const EventSpace& es = leq.space;
  std::size_t n = es.size();
  BitMatrix m(n);

  // m[a] = union of up(b) over base partners b of a; up-sets are rows of the
  // reflexive causality order. Partners are grouped per choice node and role
  // so each branch side is widened once.
  Path prefix;
  std::size_t next_leaf = 0;
  std::function<void(const ChorPtr&, const Path&, std::size_t, std::size_t, std::size_t)>
      visit = [&](const ChorPtr& node, const Path&, std::size_t begin, std::size_t mid,
                  std::size_t end) {
        if (node->kind != ChorKind::Choice) return;
        std::map<Role, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
            by_role;
        for (std::size_t k = 2 * begin; k < 2 * mid; ++k)
          by_role[es.events[k].role].first.push_back(k);
        for (std::size_t l = 2 * mid; l < 2 * end; ++l)
          by_role[es.events[l].role].second.push_back(l);
        BitMatrix up(2, n);  // row 0: union of up(left side); row 1: right side
        // Only the causally minimal members of each side matter: a later
        // member e dominated by a kept member a (a <= e) contributes an
        // up-set contained in a's, and inherits a's seeded conflicts through
        // the forward sweep below. Event indices grow along <=, so one
        // ascending scan with a membership test finds the minimal members.
        std::vector<std::size_t> lmin, rmin;
        for (const auto& [role, sides] : by_role) {
          const auto& [ls, rs] = sides;
          if (ls.empty() || rs.empty()) continue;
          up.clear_row(0);
          up.clear_row(1);
          lmin.clear();
          rmin.clear();
          for (std::size_t k : ls)
            if (!up.get(0, k)) {
              up.or_row_from(0, leq.matrix, k);
              lmin.push_back(k);
            }
          for (std::size_t l : rs)
            if (!up.get(1, l)) {
              up.or_row_from(1, leq.matrix, l);
              rmin.push_back(l);
            }
          for (std::size_t k : lmin) m.or_row_from(k, up, 1);
          for (std::size_t l : rmin) m.or_row_from(l, up, 0);
        }
      };
  detail::for_each_internal_node(c, prefix, next_leaf, visit);

  // Forward sweep: conflicts inherited from every causal predecessor. The
  // send's borrowed edges mirror the synchronization clause, and its own base
  // conflicts flow to its receive's successors but not to the receive itself.
  auto edges = detail::sequentiality_edges(es, c);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& out = i % 2 == 0 ? edges[i + 1] : edges[i];
    for (std::uint32_t j : out) m.or_row(j, i);
  }
  return EventRelation{es, std::move(m)};
}

inline EventRelation full_conflict(const ChorPtr& c) { return full_conflict(c, causality(c)); }

// ---------------------------------------------------------------------------
// Connectedness checks
// ---------------------------------------------------------------------------

enum class ViolationKind { SeqNotConnected, ChoiceNotUniquePoint, CausalityUnsafe };
enum class ChoiceCond { Cond1, Cond2 };
enum class CausalityClass { ParallelIssue, SequentialIssue, ChoiceIssue };

struct Violation {
  ViolationKind kind;
  Path subterm;
  ChoiceCond choice_cond = ChoiceCond::Cond1;            // ChoiceNotUniquePoint only
  CausalityClass causality_class = CausalityClass::ParallelIssue;  // CausalityUnsafe only
  std::vector<Path> witness_paths;
  std::vector<std::string> witnesses;
  // CausalityUnsafe: which receive can be cross-matched. "first"/"second"
  // refer to witness order (first = lexicographically smaller leaf path).
  bool endangered_first = false;
  bool endangered_second = false;

  std::string kind_str() const {
    switch (kind) {
      case ViolationKind::SeqNotConnected: return "SeqNotConnected";
      case ViolationKind::ChoiceNotUniquePoint: return "ChoiceNotUniquePoint";
      case ViolationKind::CausalityUnsafe: return "CausalityUnsafe";
    }
    return {};
  }
};

namespace detail {

inline void for_each_subterm(const ChorPtr& c, Path& prefix,
                             const std::function<void(const ChorPtr&, const Path&)>& f) {
  f(c, prefix);
  if (c->left) {
    prefix.push_back(Step::Left);
    for_each_subterm(c->left, prefix, f);
    prefix.back() = Step::Right;
    for_each_subterm(c->right, prefix, f);
    prefix.pop_back();
  }
}

inline Path prefixed(const Path& base, Step s, const Path& rest) {
  Path out = base;
  out.push_back(s);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace detail

// Sequence connectedness: every final interaction's receiver in the left part of a Seq must
// equal every initial interaction's sender in the right part.
inline std::vector<Violation> check_sequence(const ChorPtr& c) {
  std::vector<Violation> out;
  Path prefix;
  std::function<void(const ChorPtr&, const Path&)> f = [&](const ChorPtr& node,
                                                           const Path& p) {
    if (node->kind != ChorKind::Seq) return;
    auto finals = trans_f(node->left);
    auto initials = trans_i(node->right);
    for (const auto& [fp, fi] : finals)
      for (const auto& [ip, ii] : initials)
        if (fi.receiver != ii.sender) {
          Violation v;
          v.kind = ViolationKind::SeqNotConnected;
          v.subterm = p;
          v.witness_paths = {detail::prefixed(p, Step::Left, fp),
                             detail::prefixed(p, Step::Right, ip)};
          v.witnesses = {render_interaction(fi), render_interaction(ii)};
          out.push_back(std::move(v));
          return;  // one violation per Seq subterm
        }
  };
  detail::for_each_subterm(c, prefix, f);
  return out;
}

// Choice connectedness: all initial interactions across the branches of a Choice share one
// sender (Cond1) and both branches mention the same role set (Cond2).
inline std::vector<Violation> check_choice(const ChorPtr& c) {
  std::vector<Violation> out;
  Path prefix;
  std::function<void(const ChorPtr&, const Path&)> f = [&](const ChorPtr& node,
                                                           const Path& p) {
    if (node->kind != ChorKind::Choice) return;
    auto li = trans_i(node->left);
    auto ri = trans_i(node->right);
    bool cond1_done = false;
    for (const auto& [lp, l] : li) {
      for (const auto& [rp, r] : ri)
        if (l.sender != r.sender) {
          Violation v;
          v.kind = ViolationKind::ChoiceNotUniquePoint;
          v.choice_cond = ChoiceCond::Cond1;
          v.subterm = p;
          v.witness_paths = {detail::prefixed(p, Step::Left, lp),
                             detail::prefixed(p, Step::Right, rp)};
          v.witnesses = {render_interaction(l), render_interaction(r)};
          out.push_back(std::move(v));
          cond1_done = true;
          break;
        }
      if (cond1_done) break;
    }
    std::set<Role> lr = roles(node->left), rr = roles(node->right);
    if (lr != rr) {
      Violation v;
      v.kind = ViolationKind::ChoiceNotUniquePoint;
      v.choice_cond = ChoiceCond::Cond2;
      v.subterm = p;
      std::string ls, rs;
      for (const auto& r : lr) ls += (ls.empty() ? "" : ",") + r.name;
      for (const auto& r : rr) rs += (rs.empty() ? "" : ",") + r.name;
      v.witnesses = {"roles(left)={" + ls + "}", "roles(right)={" + rs + "}"};
      out.push_back(std::move(v));
    }
  };
  detail::for_each_subterm(c, prefix, f);
  return out;
}

namespace detail {

inline Path common_prefix(const Path& a, const Path& b) {
  Path out;
  for (std::size_t i = 0; i < a.size() && i < b.size() && a[i] == b[i]; ++i)
    out.push_back(a[i]);
  return out;
}

}  // namespace detail

// Causality safety over a precomputed pair of relations.
inline std::vector<Violation> check_causality(const ChorPtr& c, const EventRelation& leq,
                                              const EventRelation& conflict) {
  std::vector<Violation> out;
  const auto& lv = leq.space.interaction_leaves;
  // pairs are only formed within an operation's leaf group
  std::map<std::reference_wrapper<const Operation>, std::vector<std::size_t>, std::less<Operation>>
      by_op;
  for (std::size_t k = 0; k < lv.size(); ++k) by_op[lv[k].second.op].push_back(k);
  for (const auto& [op, group] : by_op)
    for (std::size_t gi = 0; gi < group.size(); ++gi)
    for (std::size_t gj = gi + 1; gj < group.size(); ++gj) {
      std::size_t k = group[gi], l = group[gj];
      std::size_t s1 = EventSpace::send_index(k), r1 = EventSpace::receive_index(k);
      std::size_t s2 = EventSpace::send_index(l), r2 = EventSpace::receive_index(l);
      bool dir_a = leq.contains(s1, r2) || leq.contains(r2, s1) || conflict.contains(s1, r2);
      bool dir_b = leq.contains(s2, r1) || leq.contains(r1, s2) || conflict.contains(s2, r1);
      if (dir_a && dir_b) continue;
      Violation v;
      v.kind = ViolationKind::CausalityUnsafe;
      v.subterm = detail::common_prefix(lv[k].first, lv[l].first);
      ChorPtr lca = subterm_at(c, v.subterm);
      v.causality_class = lca->kind == ChorKind::Par     ? CausalityClass::ParallelIssue
                          : lca->kind == ChorKind::Seq   ? CausalityClass::SequentialIssue
                                                         : CausalityClass::ChoiceIssue;
      v.witness_paths = {lv[k].first, lv[l].first};
      v.witnesses = {render_interaction(lv[k].second), render_interaction(lv[l].second)};
      v.endangered_first = !dir_b;   // send of second vs receive of first
      v.endangered_second = !dir_a;  // send of first vs receive of second
      out.push_back(std::move(v));
    }
  return out;
}

inline std::vector<Violation> check_causality(const ChorPtr& c) {
  EventRelation leq = causality(c);
  EventRelation conflict = full_conflict(c, leq);
  return check_causality(c, leq, conflict);
}

// Empty result iff the choreography is connected.
inline std::vector<Violation> check_all(const ChorPtr& c) {
  std::vector<Violation> out = check_sequence(c);
  auto ch = check_choice(c);
  out.insert(out.end(), ch.begin(), ch.end());
  auto ca = check_causality(c);
  out.insert(out.end(), ca.begin(), ca.end());
  return out;
}

}  // namespace chorc
