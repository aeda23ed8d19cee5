#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "chorc/semantics.hpp"
#include "chorc/syntax.hpp"

namespace chorc {

// ---------------------------------------------------------------------------
// Processes and projected systems
// ---------------------------------------------------------------------------

enum class ProcKind { Input, Output, One, Zero, Seq, Par, Choice, Msg };

struct Proc;
using ProcPtr = std::shared_ptr<const Proc>;

// Endpoint process term. Msg is runtime-only: a message in flight at its
// emitting role under the asynchronous semantics.
struct Proc {
  ProcKind kind;
  Operation op;  // Input/Output/Msg
  ProcPtr left;
  ProcPtr right;
};

inline ProcPtr mk_input(Operation op) {
  return std::make_shared<Proc>(Proc{ProcKind::Input, std::move(op), nullptr, nullptr});
}
inline ProcPtr mk_output(Operation op) {
  return std::make_shared<Proc>(Proc{ProcKind::Output, std::move(op), nullptr, nullptr});
}
inline ProcPtr mk_msg(Operation op) {
  return std::make_shared<Proc>(Proc{ProcKind::Msg, std::move(op), nullptr, nullptr});
}
inline ProcPtr proc_one() {
  static const ProcPtr p = std::make_shared<Proc>(Proc{ProcKind::One, {}, nullptr, nullptr});
  return p;
}
inline ProcPtr proc_zero() {
  static const ProcPtr p = std::make_shared<Proc>(Proc{ProcKind::Zero, {}, nullptr, nullptr});
  return p;
}
inline ProcPtr mk_pseq(ProcPtr l, ProcPtr r) {
  return std::make_shared<Proc>(Proc{ProcKind::Seq, {}, std::move(l), std::move(r)});
}
inline ProcPtr mk_ppar(ProcPtr l, ProcPtr r) {
  return std::make_shared<Proc>(Proc{ProcKind::Par, {}, std::move(l), std::move(r)});
}
inline ProcPtr mk_pchoice(ProcPtr l, ProcPtr r) {
  return std::make_shared<Proc>(Proc{ProcKind::Choice, {}, std::move(l), std::move(r)});
}

inline int compare(const ProcPtr& a, const ProcPtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  switch (a->kind) {
    case ProcKind::Input:
    case ProcKind::Output:
    case ProcKind::Msg:
      if (a->op != b->op) return a->op < b->op ? -1 : 1;
      return 0;
    case ProcKind::One:
    case ProcKind::Zero:
      return 0;
    default: {
      int c = compare(a->left, b->left);
      if (c != 0) return c;
      return compare(a->right, b->right);
    }
  }
}

// Parallel composition of uniquely named roles.
struct EndpointSystem {
  std::vector<std::pair<Role, ProcPtr>> roles;
};

inline int compare(const EndpointSystem& a, const EndpointSystem& b) {
  if (a.roles.size() != b.roles.size()) return a.roles.size() < b.roles.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.roles.size(); ++i) {
    if (a.roles[i].first != b.roles[i].first)
      return a.roles[i].first < b.roles[i].first ? -1 : 1;
    int c = compare(a.roles[i].second, b.roles[i].second);
    if (c != 0) return c;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Rendering: `!o` output, `?o` input, `<o>` message; systems `[P]@a || [Q]@b`
// ---------------------------------------------------------------------------

namespace detail {

inline int pprec(ProcKind k) {
  switch (k) {
    case ProcKind::Choice: return 0;
    case ProcKind::Par: return 1;
    case ProcKind::Seq: return 2;
    default: return 3;
  }
}

inline void render_proc_rec(const ProcPtr& p, int parent, bool left_child,
                            std::string& out) {
  switch (p->kind) {
    case ProcKind::Input: out += "?" + render_op(p->op); return;
    case ProcKind::Output: out += "!" + render_op(p->op); return;
    case ProcKind::Msg: out += "<" + render_op(p->op) + ">"; return;
    case ProcKind::One: out += "1"; return;
    case ProcKind::Zero: out += "0"; return;
    default: {
      int prec = pprec(p->kind);
      bool parens = prec < parent || (prec == parent && left_child);
      if (parens) out += "(";
      const char* sep = p->kind == ProcKind::Seq ? " ; "
                        : p->kind == ProcKind::Par ? " | "
                                                   : " + ";
      render_proc_rec(p->left, prec, true, out);
      out += sep;
      render_proc_rec(p->right, prec, false, out);
      if (parens) out += ")";
      return;
    }
  }
}

}  // namespace detail

inline std::string render_process(const ProcPtr& p) {
  std::string out;
  detail::render_proc_rec(p, 0, false, out);
  return out;
}

inline std::string render_system(const EndpointSystem& s) {
  std::string out;
  for (const auto& [role, proc] : s.roles) {
    if (!out.empty()) out += " || ";
    out += "[" + render_process(proc) + "]@" + role.name;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

enum class SemanticsMode { Sync, Async };

enum class SysLabelKind { LocalIn, LocalOut, MsgAvail, Comm, Tick };

struct SysLabel {
  SysLabelKind kind = SysLabelKind::Tick;
  Operation op;  // all but Tick
  Role role;     // LocalIn/LocalOut/MsgAvail
  Role peer;     // Comm: role = sender, peer = receiver

  static SysLabel tick() { return {}; }
  static SysLabel local_in(Operation o, Role a) {
    return SysLabel{SysLabelKind::LocalIn, std::move(o), std::move(a), {}};
  }
  static SysLabel local_out(Operation o, Role a) {
    return SysLabel{SysLabelKind::LocalOut, std::move(o), std::move(a), {}};
  }
  static SysLabel msg_avail(Operation o, Role a) {
    return SysLabel{SysLabelKind::MsgAvail, std::move(o), std::move(a), {}};
  }
  static SysLabel comm(Operation o, Role from, Role to) {
    return SysLabel{SysLabelKind::Comm, std::move(o), std::move(from), std::move(to)};
  }

  bool is_private() const { return kind != SysLabelKind::Tick && op.is_private(); }

  std::string str() const {
    switch (kind) {
      case SysLabelKind::LocalIn: return "?" + render_op(op) + "@" + role.name;
      case SysLabelKind::LocalOut: return "!" + render_op(op) + "@" + role.name;
      case SysLabelKind::MsgAvail: return "<" + render_op(op) + ">@" + role.name;
      case SysLabelKind::Comm:
        return render_op(op) + ":" + role.name + "->" + peer.name;
      case SysLabelKind::Tick: return "TICK";
    }
    return {};
  }

  friend auto operator<=>(const SysLabel&, const SysLabel&) = default;
};

using SysTrace = std::vector<SysLabel>;
using SysTraceSet = std::set<SysTrace>;

// ---------------------------------------------------------------------------
// Process-level LTS
// ---------------------------------------------------------------------------

namespace detail {

enum class PLabelKind { In, Out, MsgAvail, Tick };

struct PLabel {
  PLabelKind kind;
  Operation op;  // not Tick
  friend auto operator<=>(const PLabel&, const PLabel&) = default;
};

struct PTransition {
  PLabel label;
  ProcPtr succ;
};

// Transition lists memoized per subterm. Successive system states share almost
// all of their process structure, so during trace enumeration most of each
// state's transitions come straight out of the cache; only the spine above the
// subterm that actually moved is recomputed. Keys are shared pointers so the
// cached successors stay alive for as long as the memo does.
struct ProcPtrHash {
  std::size_t operator()(const ProcPtr& p) const {
    return std::hash<const Proc*>()(p.get());
  }
};
using ProcStepMemo = std::unordered_map<ProcPtr, std::vector<PTransition>, ProcPtrHash>;

inline const std::vector<PTransition>& step_proc(const ProcPtr& p, SemanticsMode mode,
                                                 ProcStepMemo& memo) {
  if (auto it = memo.find(p); it != memo.end()) return it->second;
  std::vector<PTransition> out;
  switch (p->kind) {
    case ProcKind::Input:
      out.push_back({{PLabelKind::In, p->op}, proc_one()});
      break;
    case ProcKind::Output:
      if (mode == SemanticsMode::Async)
        out.push_back({{PLabelKind::Out, p->op}, proc_one()});  // rule Out
      else
        out.push_back({{PLabelKind::MsgAvail, p->op}, proc_one()});  // rule Sync-Out
      break;
    case ProcKind::Msg:
      if (mode == SemanticsMode::Async)
        out.push_back({{PLabelKind::MsgAvail, p->op}, proc_one()});  // rule Async-Out
      break;
    case ProcKind::One:
      out.push_back({{PLabelKind::Tick, {}}, proc_zero()});
      break;
    case ProcKind::Zero:
      break;
    case ProcKind::Seq:
      for (const auto& t : step_proc(p->left, mode, memo)) {
        if (t.label.kind != PLabelKind::Tick)
          out.push_back({t.label, mk_pseq(t.succ, p->right)});
        else
          for (const auto& r : step_proc(p->right, mode, memo)) out.push_back(r);  // Seq-end
      }
      break;
    case ProcKind::Par: {
      ProcPtr lticked, rticked;
      for (const auto& t : step_proc(p->left, mode, memo)) {
        if (t.label.kind == PLabelKind::Tick)
          lticked = t.succ;
        else
          out.push_back({t.label, mk_ppar(t.succ, p->right)});
      }
      for (const auto& t : step_proc(p->right, mode, memo)) {
        if (t.label.kind == PLabelKind::Tick)
          rticked = t.succ;
        else
          out.push_back({t.label, mk_ppar(p->left, t.succ)});
      }
      if (lticked && rticked)
        out.push_back({{PLabelKind::Tick, {}}, mk_ppar(lticked, rticked)});  // Inner Par-end
      break;
    }
    case ProcKind::Choice:
      for (const auto& t : step_proc(p->left, mode, memo)) out.push_back(t);
      for (const auto& t : step_proc(p->right, mode, memo)) out.push_back(t);
      break;
  }
  return memo.emplace(p, std::move(out)).first->second;
}

inline std::vector<PTransition> step_proc(const ProcPtr& p, SemanticsMode mode) {
  ProcStepMemo memo;
  return step_proc(p, mode, memo);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// System-level LTS (the Sync variant swaps Out/Async-Out/Msg for Sync-Out)
// ---------------------------------------------------------------------------

using SysTransition = std::pair<SysLabel, EndpointSystem>;

namespace detail {

struct SliceTransition {
  SysLabel label;
  std::vector<std::pair<Role, ProcPtr>> slice;
};

inline std::vector<SliceTransition> step_role(const Role& a, const ProcPtr& p,
                                              SemanticsMode mode, ProcStepMemo& memo) {
  std::vector<SliceTransition> out;
  for (const auto& t : step_proc(p, mode, memo)) {
    switch (t.label.kind) {
      case PLabelKind::Tick:  // Lift-Tick
        out.push_back({SysLabel::tick(), {{a, t.succ}}});
        break;
      case PLabelKind::In:  // Lift
        out.push_back({SysLabel::local_in(t.label.op, a), {{a, t.succ}}});
        break;
      case PLabelKind::MsgAvail:  // Lift
        out.push_back({SysLabel::msg_avail(t.label.op, a), {{a, t.succ}}});
        break;
      case PLabelKind::Out:  // Msg: the output is stored at the emitting role
        out.push_back({SysLabel::local_out(t.label.op, a),
                       {{a, mk_ppar(t.succ, mk_msg(t.label.op))}}});
        break;
    }
  }
  return out;
}

// Right-associated view of the role list: roles[lo] || step_slice(lo+1, hi).
inline std::vector<SliceTransition> step_slice(
    const std::vector<std::pair<Role, ProcPtr>>& roles, std::size_t lo, std::size_t hi,
    SemanticsMode mode, ProcStepMemo& memo) {
  if (hi - lo == 1) return step_role(roles[lo].first, roles[lo].second, mode, memo);

  std::vector<SliceTransition> ls =
      step_role(roles[lo].first, roles[lo].second, mode, memo);
  std::vector<SliceTransition> rs = step_slice(roles, lo + 1, hi, mode, memo);
  std::vector<SliceTransition> out;

  auto rest_unchanged = [&] {
    return std::vector<std::pair<Role, ProcPtr>>(roles.begin() + lo + 1,
                                                 roles.begin() + hi);
  };
  auto combine = [&](const std::vector<std::pair<Role, ProcPtr>>& head,
                     const std::vector<std::pair<Role, ProcPtr>>& tail) {
    std::vector<std::pair<Role, ProcPtr>> s = head;
    s.insert(s.end(), tail.begin(), tail.end());
    return s;
  };

  for (const auto& lt : ls) {
    if (lt.label.kind == SysLabelKind::Tick) continue;
    out.push_back({lt.label, combine(lt.slice, rest_unchanged())});  // Ext-Parallel
  }
  for (const auto& rt : rs) {
    if (rt.label.kind == SysLabelKind::Tick) continue;
    out.push_back({rt.label, combine({roles[lo]}, rt.slice)});  // Ext-Parallel (sym)
  }
  // Ext-Par-End
  for (const auto& lt : ls)
    if (lt.label.kind == SysLabelKind::Tick)
      for (const auto& rt : rs)
        if (rt.label.kind == SysLabelKind::Tick)
          out.push_back({SysLabel::tick(), combine(lt.slice, rt.slice)});
  // Synch (both orientations)
  for (const auto& lt : ls)
    for (const auto& rt : rs) {
      if (lt.label.kind == SysLabelKind::MsgAvail &&
          rt.label.kind == SysLabelKind::LocalIn && lt.label.op == rt.label.op)
        out.push_back({SysLabel::comm(lt.label.op, lt.label.role, rt.label.role),
                       combine(lt.slice, rt.slice)});
      if (lt.label.kind == SysLabelKind::LocalIn &&
          rt.label.kind == SysLabelKind::MsgAvail && lt.label.op == rt.label.op)
        out.push_back({SysLabel::comm(lt.label.op, rt.label.role, lt.label.role),
                       combine(lt.slice, rt.slice)});
    }
  return out;
}

}  // namespace detail

inline std::vector<SysTransition> step_system(const EndpointSystem& s, SemanticsMode mode,
                                              detail::ProcStepMemo* memo = nullptr) {
  std::vector<SysTransition> out;
  if (s.roles.empty()) return out;
  detail::ProcStepMemo local;
  for (auto& t : detail::step_slice(s.roles, 0, s.roles.size(), mode, memo ? *memo : local))
    out.push_back({t.label, EndpointSystem{std::move(t.slice)}});
  return out;
}

inline std::vector<SysTransition> step_sync(const EndpointSystem& s) {
  return step_system(s, SemanticsMode::Sync);
}
inline std::vector<SysTransition> step_async(const EndpointSystem& s) {
  return step_system(s, SemanticsMode::Async);
}

// ---------------------------------------------------------------------------
// System traces
// ---------------------------------------------------------------------------

namespace detail {

// Trace alphabet: Sync traces see interactions and tick;
// Async traces additionally see output emissions.
inline bool in_alphabet(const SysLabel& l, SemanticsMode mode) {
  switch (l.kind) {
    case SysLabelKind::Comm:
    case SysLabelKind::Tick:
      return true;
    case SysLabelKind::LocalOut:
      return mode == SemanticsMode::Async;
    default:
      return false;
  }
}

// Enumerates trace-alphabet transitions directly instead of going through
// step_system: solo inputs and message offers never appear in traces, so
// matching senders to receivers through op-indexed maps avoids materializing
// them and the quadratic label pairing of the generic slice product.
inline void enumerate_sys_traces(const EndpointSystem& s, SemanticsMode mode,
                                 SysTrace& prefix, SysTraceSet& out, std::uint64_t cap,
                                 ProcStepMemo& memo) {
  bool any = false;
  auto visit = [&](const SysLabel& lab, EndpointSystem succ) {
    any = true;
    prefix.push_back(lab);
    enumerate_sys_traces(succ, mode, prefix, out, cap, memo);
    prefix.pop_back();
  };

  // (role index, successor) per pending offer/input, grouped by operation.
  std::map<Operation, std::vector<std::pair<std::size_t, const ProcPtr*>>> offers, inputs;
  std::vector<const ProcPtr*> ticks(s.roles.size(), nullptr);
  bool all_tick = !s.roles.empty();
  for (std::size_t i = 0; i < s.roles.size(); ++i) {
    bool tick = false;
    for (const auto& t : step_proc(s.roles[i].second, mode, memo)) {
      switch (t.label.kind) {
        case PLabelKind::Tick:
          tick = true;
          ticks[i] = &t.succ;
          break;
        case PLabelKind::MsgAvail:
          offers[t.label.op].push_back({i, &t.succ});
          break;
        case PLabelKind::In:
          inputs[t.label.op].push_back({i, &t.succ});
          break;
        case PLabelKind::Out: {  // Msg: the output is stored at the emitting role
          EndpointSystem succ = s;
          succ.roles[i].second = mk_ppar(t.succ, mk_msg(t.label.op));
          visit(SysLabel::local_out(t.label.op, s.roles[i].first), std::move(succ));
          break;
        }
      }
    }
    all_tick = all_tick && tick;
  }
  // Synch (either orientation): an offer meets an input at another role.
  for (const auto& [op, senders] : offers) {
    auto it = inputs.find(op);
    if (it == inputs.end()) continue;
    for (const auto& [si, sp] : senders)
      for (const auto& [ri, rp] : it->second) {
        if (si == ri) continue;
        EndpointSystem succ = s;
        succ.roles[si].second = *sp;
        succ.roles[ri].second = *rp;
        visit(SysLabel::comm(op, s.roles[si].first, s.roles[ri].first), std::move(succ));
      }
  }
  // Ext-Par-End: the system ticks when every role can. Post-tick processes
  // have no transitions, so one representative combination suffices.
  if (all_tick) {
    EndpointSystem succ = s;
    for (std::size_t i = 0; i < s.roles.size(); ++i) succ.roles[i].second = *ticks[i];
    visit(SysLabel::tick(), std::move(succ));
  }
  if (!any) {
    if (out.size() >= cap)
      throw CapExceeded("system trace enumeration exceeded cap of " + std::to_string(cap));
    out.insert(prefix);
  }
}

}  // namespace detail

inline SysTraceSet sys_strong_traces(const EndpointSystem& s, SemanticsMode mode,
                                     std::uint64_t cap = kDefaultTraceCap) {
  SysTraceSet out;
  SysTrace prefix;
  detail::ProcStepMemo memo;
  detail::enumerate_sys_traces(s, mode, prefix, out, cap, memo);
  return out;
}

inline SysTraceSet sys_weak_traces(const EndpointSystem& s, SemanticsMode mode,
                                   std::uint64_t cap = kDefaultTraceCap) {
  SysTraceSet out;
  for (const auto& t : sys_strong_traces(s, mode, cap)) {
    SysTrace w;
    for (const auto& lab : t)
      if (!lab.is_private()) w.push_back(lab);
    out.insert(std::move(w));
  }
  return out;
}

}  // namespace chorc
