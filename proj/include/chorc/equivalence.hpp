#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chorc/endpoint.hpp"
#include "chorc/projection.hpp"
#include "chorc/semantics.hpp"
#include "chorc/syntax.hpp"

namespace chorc {

enum class EquivMode { Strong, Weak };

struct ConformanceResult {
  bool sync_strong_equal = false;
  // Present when unequal: a trace in exactly one of the two sets, in
  // choreography label form.
  std::optional<Trace> counterexample;
};

namespace detail {

// Synchronous system traces contain only interaction and tick labels, so
// they translate directly into choreography-level traces.
inline Trace sys_to_chor_trace(const SysTrace& t) {
  Trace out;
  for (const SysLabel& l : t) {
    if (l.kind == SysLabelKind::Tick)
      out.push_back(ChorLabel::mk_tick());
    else
      out.push_back(ChorLabel::mk_comm(Interaction{l.role, l.peer, l.op}));
  }
  return out;
}

// Exact maximal-trace-set comparison without materializing the sets.
//
// The trace sets of large terms grow factorially with parallel width, so
// equality is decided on a canonical deterministic acceptor instead:
// terms are interned so structurally equal residues share one transition
// list, the labelled transition relation is determinized by subset
// construction, and each subset node is hash-consed by its (acceptance,
// sorted outgoing edges) signature. The resulting identifiers are canonical
// for the trace language, so two trace sets are equal iff their root
// identifiers coincide. Choreography and system languages share one
// signature table (system labels are mapped to choreography form), which is
// what makes the cross-world conformance comparison a single integer test.
//
// Acceptance mirrors maximality: a subset accepts its prefix as a complete
// trace iff it contains a state with no outgoing transitions. The word count
// per node (saturating) supports the enumeration cap contract.
class TraceLang {
 public:
  // Language of the strong (weak = false) or weak maximal trace set.
  int chor_language(const ChorPtr& c, bool weak) {
    return chor_subset_lang({chor_intern(c)}, weak);
  }

  // Language of the strong synchronous system traces, in choreography label
  // form. One TraceLang instance handles a single system's role list.
  int sys_language(const EndpointSystem& s) {
    sys_roles_.clear();
    std::vector<int> pids;
    for (const auto& [role, proc] : s.roles) {
      sys_roles_.push_back(role);
      pids.push_back(proc_intern(proc));
    }
    return sys_subset_lang({sys_state(std::move(pids))});
  }

  // Number of distinct traces in the language, saturating at uint64 max.
  std::uint64_t words(int lang) const { return counts_[lang]; }

  // Whether L(a) \ L(b) is nonempty.
  bool diff_nonempty(int a, int b) {
    if (a == b || counts_[a] == 0) return false;
    auto [it, fresh] = diff_memo_.try_emplace({a, b}, false);
    if (!fresh) return it->second;
    bool r = sigs_[a].accept && !sigs_[b].accept;
    for (const auto& [lab, sa] : sigs_[a].kids) {
      if (r) break;
      r = diff_nonempty(sa, kid_of(b, lab));
    }
    return diff_memo_[{a, b}] = r;
  }

  // Lexicographically smallest trace in L(a) \ L(b); requires one to exist.
  Trace smallest_diff(int a, int b) {
    Trace t;
    for (;;) {
      if (sigs_[a].accept && !sigs_[b].accept) return t;
      bool advanced = false;
      for (const auto& [lab, sa] : sigs_[a].kids) {
        int sb = kid_of(b, lab);
        if (diff_nonempty(sa, sb)) {
          t.push_back(lab);
          a = sa;
          b = sb;
          advanced = true;
          break;
        }
      }
      if (!advanced) throw PreconditionError("smallest_diff: languages are equal");
    }
  }

 private:
  // ----- canonical language nodes -----
  struct LangSig {
    bool accept = false;
    std::vector<std::pair<ChorLabel, int>> kids;  // sorted by label
    friend auto operator<=>(const LangSig&, const LangSig&) = default;
  };
  std::map<LangSig, int> canon_;
  std::vector<LangSig> sigs_;
  std::vector<std::uint64_t> counts_;
  std::map<std::pair<int, int>, bool> diff_memo_;
  int empty_lang_ = -1;

  static std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    return a > ~b ? ~std::uint64_t{0} : a + b;
  }

  int canonize(LangSig sig) {
    auto [it, fresh] = canon_.try_emplace(std::move(sig), -1);
    if (fresh) {
      it->second = static_cast<int>(sigs_.size());
      std::uint64_t n = it->first.accept ? 1 : 0;
      for (const auto& [lab, kid] : it->first.kids) n = sat_add(n, counts_[kid]);
      sigs_.push_back(it->first);
      counts_.push_back(n);
    }
    return it->second;
  }

  int empty_lang() {
    if (empty_lang_ < 0) empty_lang_ = canonize({});
    return empty_lang_;
  }

  // Successor of language node `id` under `lab`; empty language if absent.
  int kid_of(int id, const ChorLabel& lab) {
    const auto& kids = sigs_[id].kids;
    auto it = std::lower_bound(
        kids.begin(), kids.end(), lab,
        [](const std::pair<ChorLabel, int>& k, const ChorLabel& l) { return k.first < l; });
    if (it != kids.end() && it->first == lab) return it->second;
    return empty_lang();
  }

  // ----- choreography LTS over interned terms -----
  struct CNode {
    ChorKind kind;
    int left = -1, right = -1;
    Interaction inter;  // Interaction nodes only
  };
  std::vector<CNode> cnodes_;
  std::vector<std::optional<std::vector<std::pair<ChorLabel, int>>>> ctrans_;
  std::map<Interaction, int> inter_ids_;
  std::map<std::tuple<int, int, int>, int> ccomp_ids_;
  int cone_ = -1, czero_ = -1;
  std::unordered_map<const Chor*, int> chor_ptr_ids_;
  std::map<std::pair<std::vector<int>, bool>, int> chor_lang_memo_;

  int cnode(CNode n) {
    cnodes_.push_back(std::move(n));
    ctrans_.emplace_back();
    return static_cast<int>(cnodes_.size()) - 1;
  }
  int catom(ChorKind k, int& slot) {
    if (slot < 0) slot = cnode({k, -1, -1, {}});
    return slot;
  }
  int cinter(const Interaction& i) {
    auto [it, fresh] = inter_ids_.try_emplace(i, -1);
    if (fresh) it->second = cnode({ChorKind::Interaction, -1, -1, i});
    return it->second;
  }
  int ccomp(ChorKind k, int l, int r) {
    auto [it, fresh] = ccomp_ids_.try_emplace({static_cast<int>(k), l, r}, -1);
    if (fresh) it->second = cnode({k, l, r, {}});
    return it->second;
  }

  int chor_intern(const ChorPtr& c) {
    auto it = chor_ptr_ids_.find(c.get());
    if (it != chor_ptr_ids_.end()) return it->second;
    int id;
    switch (c->kind) {
      case ChorKind::Interaction: id = cinter(c->inter); break;
      case ChorKind::One: id = catom(ChorKind::One, cone_); break;
      case ChorKind::Zero: id = catom(ChorKind::Zero, czero_); break;
      default: {
        int l = chor_intern(c->left);
        id = ccomp(c->kind, l, chor_intern(c->right));
        break;
      }
    }
    chor_ptr_ids_.emplace(c.get(), id);
    return id;
  }

  // One-step transitions of an interned term, memoized. Mirrors step() from
  // semantics.hpp, with structural equality of successors collapsed to id
  // equality. Returns by value: recursive construction grows the tables.
  std::vector<std::pair<ChorLabel, int>> ctrans(int id) {
    if (ctrans_[id]) return *ctrans_[id];
    const CNode n = cnodes_[id];
    std::vector<std::pair<ChorLabel, int>> out;
    switch (n.kind) {
      case ChorKind::Interaction:
        out.push_back({ChorLabel::mk_comm(n.inter), catom(ChorKind::One, cone_)});
        break;
      case ChorKind::One:
        out.push_back({ChorLabel::mk_tick(), catom(ChorKind::Zero, czero_)});
        break;
      case ChorKind::Zero:
        break;
      case ChorKind::Seq:
        for (const auto& [lab, succ] : ctrans(n.left)) {
          if (!lab.tick)
            out.push_back({lab, ccomp(ChorKind::Seq, succ, n.right)});
          else  // Seq-end: left terminates, right takes over (any label)
            for (const auto& t : ctrans(n.right)) out.push_back(t);
        }
        break;
      case ChorKind::Par: {
        int lticked = -1, rticked = -1;
        for (const auto& [lab, succ] : ctrans(n.left)) {
          if (lab.tick)
            lticked = succ;
          else
            out.push_back({lab, ccomp(ChorKind::Par, succ, n.right)});
        }
        for (const auto& [lab, succ] : ctrans(n.right)) {
          if (lab.tick)
            rticked = succ;
          else
            out.push_back({lab, ccomp(ChorKind::Par, n.left, succ)});
        }
        if (lticked >= 0 && rticked >= 0)
          out.push_back({ChorLabel::mk_tick(), ccomp(ChorKind::Par, lticked, rticked)});
        break;
      }
      case ChorKind::Choice:
        for (const auto& t : ctrans(n.left)) out.push_back(t);
        for (const auto& t : ctrans(n.right)) out.push_back(t);
        break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    ctrans_[id] = out;
    return out;
  }

  // Language of the subset of term states `S`. In weak mode the subset is
  // first closed under private-labelled transitions, which erases them from
  // the alphabet exactly as weaken() erases them from traces.
  int chor_subset_lang(std::vector<int> S, bool weak) {
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    if (weak) {
      std::vector<int> stack = S;
      std::set<int> seen(S.begin(), S.end());
      while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (const auto& [lab, succ] : ctrans(s))
          if (lab.is_private() && seen.insert(succ).second) stack.push_back(succ);
      }
      S.assign(seen.begin(), seen.end());
    }
    auto key = std::pair{std::move(S), weak};
    if (auto it = chor_lang_memo_.find(key); it != chor_lang_memo_.end()) return it->second;

    LangSig sig;
    std::map<ChorLabel, std::vector<int>> next;
    for (int s : key.first) {
      auto ts = ctrans(s);
      if (ts.empty()) sig.accept = true;  // a maximal trace ends here
      for (auto& [lab, succ] : ts)
        if (!(weak && lab.is_private())) next[lab].push_back(succ);
    }
    for (auto& [lab, succs] : next)
      sig.kids.push_back({lab, chor_subset_lang(std::move(succs), weak)});
    int id = canonize(std::move(sig));
    chor_lang_memo_.emplace(std::move(key), id);
    return id;
  }

  // ----- synchronous system LTS over interned processes -----
  struct PNode {
    ProcKind kind;
    int left = -1, right = -1;
    Operation op;  // Input/Output/Msg nodes only
  };
  std::vector<PNode> pnodes_;
  std::vector<std::optional<std::vector<std::pair<PLabel, int>>>> ptrans_;
  std::map<std::pair<int, Operation>, int> pleaf_ids_;
  std::map<std::tuple<int, int, int>, int> pcomp_ids_;
  int pone_ = -1, pzero_ = -1;
  std::unordered_map<const Proc*, int> proc_ptr_ids_;

  std::vector<Role> sys_roles_;
  std::map<std::vector<int>, int> sys_state_ids_;
  std::vector<std::vector<int>> sys_states_;
  std::vector<std::optional<std::vector<std::pair<ChorLabel, int>>>> strans_;
  std::map<std::vector<int>, int> sys_lang_memo_;

  int pnode(PNode n) {
    pnodes_.push_back(std::move(n));
    ptrans_.emplace_back();
    return static_cast<int>(pnodes_.size()) - 1;
  }
  int patom(ProcKind k, int& slot) {
    if (slot < 0) slot = pnode({k, -1, -1, {}});
    return slot;
  }
  int pleaf(ProcKind k, const Operation& op) {
    auto [it, fresh] = pleaf_ids_.try_emplace({static_cast<int>(k), op}, -1);
    if (fresh) it->second = pnode({k, -1, -1, op});
    return it->second;
  }
  int pcomp(ProcKind k, int l, int r) {
    auto [it, fresh] = pcomp_ids_.try_emplace({static_cast<int>(k), l, r}, -1);
    if (fresh) it->second = pnode({k, l, r, {}});
    return it->second;
  }

  int proc_intern(const ProcPtr& p) {
    auto it = proc_ptr_ids_.find(p.get());
    if (it != proc_ptr_ids_.end()) return it->second;
    int id;
    switch (p->kind) {
      case ProcKind::Input:
      case ProcKind::Output:
      case ProcKind::Msg:
        id = pleaf(p->kind, p->op);
        break;
      case ProcKind::One:
        id = patom(ProcKind::One, pone_);
        break;
      case ProcKind::Zero:
        id = patom(ProcKind::Zero, pzero_);
        break;
      default: {
        int l = proc_intern(p->left);
        id = pcomp(p->kind, l, proc_intern(p->right));
        break;
      }
    }
    proc_ptr_ids_.emplace(p.get(), id);
    return id;
  }

  // Mirrors step_proc under the synchronous semantics, over interned terms.
  std::vector<std::pair<PLabel, int>> ptrans(int id) {
    if (ptrans_[id]) return *ptrans_[id];
    const PNode n = pnodes_[id];
    std::vector<std::pair<PLabel, int>> out;
    switch (n.kind) {
      case ProcKind::Input:
        out.push_back({{PLabelKind::In, n.op}, patom(ProcKind::One, pone_)});
        break;
      case ProcKind::Output:  // rule Sync-Out
        out.push_back({{PLabelKind::MsgAvail, n.op}, patom(ProcKind::One, pone_)});
        break;
      case ProcKind::Msg:  // inert under the synchronous semantics
        break;
      case ProcKind::One:
        out.push_back({{PLabelKind::Tick, {}}, patom(ProcKind::Zero, pzero_)});
        break;
      case ProcKind::Zero:
        break;
      case ProcKind::Seq:
        for (const auto& [lab, succ] : ptrans(n.left)) {
          if (lab.kind != PLabelKind::Tick)
            out.push_back({lab, pcomp(ProcKind::Seq, succ, n.right)});
          else  // Seq-end
            for (const auto& t : ptrans(n.right)) out.push_back(t);
        }
        break;
      case ProcKind::Par: {
        int lticked = -1, rticked = -1;
        for (const auto& [lab, succ] : ptrans(n.left)) {
          if (lab.kind == PLabelKind::Tick)
            lticked = succ;
          else
            out.push_back({lab, pcomp(ProcKind::Par, succ, n.right)});
        }
        for (const auto& [lab, succ] : ptrans(n.right)) {
          if (lab.kind == PLabelKind::Tick)
            rticked = succ;
          else
            out.push_back({lab, pcomp(ProcKind::Par, n.left, succ)});
        }
        if (lticked >= 0 && rticked >= 0)
          out.push_back({{PLabelKind::Tick, {}}, pcomp(ProcKind::Par, lticked, rticked)});
        break;
      }
      case ProcKind::Choice:
        for (const auto& t : ptrans(n.left)) out.push_back(t);
        for (const auto& t : ptrans(n.right)) out.push_back(t);
        break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    ptrans_[id] = out;
    return out;
  }

  int sys_state(std::vector<int> pids) {
    auto [it, fresh] = sys_state_ids_.try_emplace(std::move(pids), -1);
    if (fresh) {
      it->second = static_cast<int>(sys_states_.size());
      sys_states_.push_back(it->first);
      strans_.emplace_back();
    }
    return it->second;
  }

  // Trace-alphabet transitions of a system state: interactions matching a
  // message offer at one role with an input at another (rule Synch, either
  // orientation), plus the joint tick when every role can tick. Labels are
  // already in choreography form.
  std::vector<std::pair<ChorLabel, int>> strans(int sid) {
    if (strans_[sid]) return *strans_[sid];
    const std::vector<int> pids = sys_states_[sid];
    std::vector<std::pair<ChorLabel, int>> out;

    std::map<Operation, std::vector<std::pair<std::size_t, int>>> offers, inputs;
    std::vector<int> ticks(pids.size(), -1);
    bool all_tick = !pids.empty();
    for (std::size_t i = 0; i < pids.size(); ++i) {
      bool tick = false;
      for (const auto& [lab, succ] : ptrans(pids[i])) {
        switch (lab.kind) {
          case PLabelKind::Tick:
            tick = true;
            ticks[i] = succ;
            break;
          case PLabelKind::MsgAvail:
            offers[lab.op].push_back({i, succ});
            break;
          case PLabelKind::In:
            inputs[lab.op].push_back({i, succ});
            break;
          case PLabelKind::Out:
            break;  // not produced by the synchronous rules
        }
      }
      all_tick = all_tick && tick;
    }
    for (const auto& [op, senders] : offers) {
      auto it = inputs.find(op);
      if (it == inputs.end()) continue;
      for (const auto& [si, sp] : senders)
        for (const auto& [ri, rp] : it->second) {
          if (si == ri) continue;
          std::vector<int> succ = pids;
          succ[si] = sp;
          succ[ri] = rp;
          out.push_back({ChorLabel::mk_comm(Interaction{sys_roles_[si], sys_roles_[ri], op}),
                         sys_state(std::move(succ))});
        }
    }
    if (all_tick) {
      out.push_back({ChorLabel::mk_tick(), sys_state(ticks)});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    strans_[sid] = out;
    return out;
  }

  int sys_subset_lang(std::vector<int> S) {
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    if (auto it = sys_lang_memo_.find(S); it != sys_lang_memo_.end()) return it->second;

    LangSig sig;
    std::map<ChorLabel, std::vector<int>> next;
    for (int s : S) {
      auto ts = strans(s);
      if (ts.empty()) sig.accept = true;
      for (auto& [lab, succ] : ts) next[lab].push_back(succ);
    }
    for (auto& [lab, succs] : next)
      sig.kids.push_back({lab, sys_subset_lang(std::move(succs))});
    int id = canonize(std::move(sig));
    sys_lang_memo_.emplace(std::move(S), id);
    return id;
  }
};

}  // namespace detail

// Trace-set equality, decided exactly on canonical language identifiers.
// The cap contract matches enumeration: if either compared trace set holds
// more than `cap` distinct traces, CapExceeded is thrown.
inline bool chor_equiv(const ChorPtr& a, const ChorPtr& b, EquivMode mode,
                       std::uint64_t cap = kDefaultTraceCap) {
  detail::TraceLang tl;
  bool weak = mode == EquivMode::Weak;
  int la = tl.chor_language(a, weak);
  int lb = tl.chor_language(b, weak);
  if (tl.words(la) > cap || tl.words(lb) > cap)
    throw CapExceeded("trace enumeration exceeded cap of " + std::to_string(cap));
  return la == lb;
}

// Compare the strong traces of a choreography with those of its projection
// under the synchronous semantics. When unequal, the counterexample is the
// smallest trace present in exactly one of the two sets, preferring the
// system side.
inline ConformanceResult proj_conformance(const ChorPtr& c,
                                          std::uint64_t cap = kDefaultTraceCap) {
  EndpointSystem s = project(c);
  detail::TraceLang tl;
  int lc = tl.chor_language(c, /*weak=*/false);
  int ls = tl.sys_language(s);
  if (tl.words(lc) > cap)
    throw CapExceeded("trace enumeration exceeded cap of " + std::to_string(cap));
  if (tl.words(ls) > cap)
    throw CapExceeded("system trace enumeration exceeded cap of " + std::to_string(cap));
  if (lc == ls) return {true, std::nullopt};

  ConformanceResult r;
  r.sync_strong_equal = false;
  r.counterexample =
      tl.diff_nonempty(ls, lc) ? tl.smallest_diff(ls, lc) : tl.smallest_diff(lc, ls);
  return r;
}

}  // namespace chorc
