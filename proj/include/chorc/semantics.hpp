#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "chorc/syntax.hpp"

namespace chorc {

// ---------------------------------------------------------------------------
// Labels and traces
// ---------------------------------------------------------------------------

// Either the execution of an interaction or the termination tick.
struct ChorLabel {
  bool tick = false;
  Interaction comm;  // valid iff !tick

  static ChorLabel mk_tick() { return ChorLabel{true, {}}; }
  static ChorLabel mk_comm(Interaction i) { return ChorLabel{false, std::move(i)}; }

  bool is_private() const { return !tick && comm.op.is_private(); }

  std::string str() const { return tick ? "TICK" : render_interaction(comm); }

  friend auto operator<=>(const ChorLabel&, const ChorLabel&) = default;
};

using Trace = std::vector<ChorLabel>;
using TraceSet = std::set<Trace>;

inline constexpr std::uint64_t kDefaultTraceCap = 100000;

// ---------------------------------------------------------------------------
// One-step transitions (the choreography LTS)
// ---------------------------------------------------------------------------

using ChorTransition = std::pair<ChorLabel, ChorPtr>;

struct ChorTransitionLess {
  bool operator()(const ChorTransition& a, const ChorTransition& b) const {
    if (a.first != b.first) return a.first < b.first;
    return compare(a.second, b.second) < 0;
  }
};

using ChorTransitions = std::set<ChorTransition, ChorTransitionLess>;

inline ChorTransitions step(const ChorPtr& c) {
  ChorTransitions out;
  switch (c->kind) {
    case ChorKind::Interaction:
      out.insert({ChorLabel::mk_comm(c->inter), mk_one()});
      break;
    case ChorKind::One:
      out.insert({ChorLabel::mk_tick(), mk_zero()});
      break;
    case ChorKind::Zero:
      break;
    case ChorKind::Seq: {
      ChorTransitions ls = step(c->left);
      for (const auto& [lab, succ] : ls) {
        if (!lab.tick) {
          out.insert({lab, mk_seq(succ, c->right)});
        } else {
          // Seq-end: left terminates, right takes over (any label).
          for (const auto& [rlab, rsucc] : step(c->right)) out.insert({rlab, rsucc});
        }
      }
      break;
    }
    case ChorKind::Par: {
      ChorTransitions ls = step(c->left);
      ChorTransitions rs = step(c->right);
      bool ltick = false, rtick = false;
      ChorPtr lticked, rticked;
      for (const auto& [lab, succ] : ls) {
        if (lab.tick) {
          ltick = true;
          lticked = succ;
        } else {
          out.insert({lab, mk_par(succ, c->right)});
        }
      }
      for (const auto& [lab, succ] : rs) {
        if (lab.tick) {
          rtick = true;
          rticked = succ;
        } else {
          out.insert({lab, mk_par(c->left, succ)});
        }
      }
      if (ltick && rtick) out.insert({ChorLabel::mk_tick(), mk_par(lticked, rticked)});
      break;
    }
    case ChorKind::Choice: {
      for (const auto& t : step(c->left)) out.insert(t);
      for (const auto& t : step(c->right)) out.insert(t);
      break;
    }
  }
  return out;
}

// True iff a tick-transition exists from `c` itself.
inline bool can_tick(const ChorPtr& c) {
  switch (c->kind) {
    case ChorKind::One:
      return true;
    case ChorKind::Interaction:
    case ChorKind::Zero:
      return false;
    case ChorKind::Seq:  // Seq-end with a tick from both sides
    case ChorKind::Par:  // Par-end
      return can_tick(c->left) && can_tick(c->right);
    case ChorKind::Choice:
      return can_tick(c->left) || can_tick(c->right);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Maximal trace enumeration
// ---------------------------------------------------------------------------

namespace detail {

inline void enumerate_traces(const ChorPtr& c, Trace& prefix, TraceSet& out,
                             std::uint64_t cap) {
  ChorTransitions ts = step(c);
  if (ts.empty()) {
    if (out.size() >= cap)
      throw CapExceeded("trace enumeration exceeded cap of " + std::to_string(cap));
    out.insert(prefix);
    return;
  }
  for (const auto& [lab, succ] : ts) {
    prefix.push_back(lab);
    enumerate_traces(succ, prefix, out, cap);
    prefix.pop_back();
  }
}

}  // namespace detail

// All maximal traces: label sequences ending in a state with no
// outgoing transitions. Terminates on recursion-free terms (every labelled
// step strictly shrinks the term or discharges a One).
inline TraceSet strong_traces(const ChorPtr& c, std::uint64_t cap = kDefaultTraceCap) {
  TraceSet out;
  Trace prefix;
  detail::enumerate_traces(c, prefix, out, cap);
  return out;
}

inline Trace weaken(const Trace& t) {
  Trace out;
  for (const auto& lab : t)
    if (!lab.is_private()) out.push_back(lab);
  return out;
}

inline TraceSet weak_traces(const ChorPtr& c, std::uint64_t cap = kDefaultTraceCap) {
  TraceSet out;
  for (const auto& t : strong_traces(c, cap)) out.insert(weaken(t));
  return out;
}

}  // namespace chorc
