#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#ifdef CHORC_AMEND_TRACE
#include <chrono>
#include <cstdio>
#endif

#include "chorc/analysis.hpp"
#include "chorc/semantics.hpp"
#include "chorc/syntax.hpp"

namespace chorc {

// ---------------------------------------------------------------------------
// Fresh names
// ---------------------------------------------------------------------------

// Deterministic supply of role/operation names absent from the input term.
class FreshSupply {
 public:
  FreshSupply() = default;
  FreshSupply(const ChorPtr& c, std::string prefix = "_") : prefix_(std::move(prefix)) {
    for (const auto& [p, i] : leaves(c)) {
      reserved_roles_.insert(i.sender.name);
      reserved_roles_.insert(i.receiver.name);
      reserved_ops_.insert(i.op.name);
    }
  }

  Role fresh_role() {
    for (;;) {
      std::string name = prefix_ + "e" + std::to_string(++role_counter_);
      if (reserved_roles_.insert(name).second) return Role{name};
    }
  }

  Operation fresh_op() {
    for (;;) {
      std::string name = prefix_ + "f" + std::to_string(++op_counter_);
      if (reserved_ops_.insert(name).second) return Operation{name, Visibility::Private};
    }
  }

 private:
  std::string prefix_ = "_";
  std::set<std::string> reserved_roles_, reserved_ops_;
  std::size_t role_counter_ = 0, op_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Amend report
// ---------------------------------------------------------------------------

enum class AmendPattern {
  Normalize,
  ConnectSeq,
  ConnectChoiceCond1,
  ConnectChoiceCond2,
  FixSeqCausality,
  FixChoiceCausality,
};

inline const char* pattern_name(AmendPattern p) {
  switch (p) {
    case AmendPattern::Normalize: return "Normalize";
    case AmendPattern::ConnectSeq: return "ConnectSeq";
    case AmendPattern::ConnectChoiceCond1: return "ConnectChoiceCond1";
    case AmendPattern::ConnectChoiceCond2: return "ConnectChoiceCond2";
    case AmendPattern::FixSeqCausality: return "FixSeqCausality";
    case AmendPattern::FixChoiceCausality: return "FixChoiceCausality";
  }
  return {};
}

struct AmendStep {
  AmendPattern pattern;
  Path at;
  std::string before;  // whole term, rendered
  std::string after;
};

struct AmendReport {
  std::vector<AmendStep> steps;
};

struct AmendConfig {
  int max_rounds = 16;
  std::size_t expansion_budget = 20000;
  std::string fresh_prefix = "_";
  // above this many leaves, sequence fixes share one connector role
  std::size_t connector_share_threshold = 64;
};

// ---------------------------------------------------------------------------
// Sequence connection
// ---------------------------------------------------------------------------

namespace detail {

inline Path join_path(const Path& base, Step s, const Path& rest) {
  Path out = base;
  out.push_back(s);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

inline bool seq_violates(const ChorPtr& seq) {
  for (const auto& [fp, fi] : trans_f(seq->left))
    for (const auto& [ip, ii] : trans_i(seq->right))
      if (fi.receiver != ii.sender) return true;
  return false;
}

inline bool choice_violates_cond1(const ChorPtr& ch) {
  for (const auto& [lp, l] : trans_i(ch->left))
    for (const auto& [rp, r] : trans_i(ch->right))
      if (l.sender != r.sender) return true;
  return false;
}

}  // namespace detail

// Introduces a connecting role that waits for every final interaction of the
// left part before releasing every initial interaction of the right part.
inline ChorPtr connect_sequence_with(const ChorPtr& c, const Path& at, const Role& e,
                                     FreshSupply& fresh) {
  ChorPtr sub = subterm_at(c, at);
  if (sub->kind != ChorKind::Seq || !detail::seq_violates(sub))
    throw PreconditionError("connect_sequence: subterm is not a sequence-disconnected Seq");
  ChorPtr cur = c;
  for (const auto& [p, i] : trans_f(sub->left)) {
    Path full = detail::join_path(at, Step::Left, p);
    Operation f = fresh.fresh_op();
    ChorPtr leaf = subterm_at(cur, full);
    cur = replace_at(cur, full,
                     mk_seq(leaf, mk_interaction(Interaction{i.receiver, e, f})));
  }
  for (const auto& [p, i] : trans_i(sub->right)) {
    Path full = detail::join_path(at, Step::Right, p);
    Operation g = fresh.fresh_op();
    ChorPtr leaf = subterm_at(cur, full);
    cur = replace_at(cur, full,
                     mk_seq(mk_interaction(Interaction{e, i.sender, g}), leaf));
  }
  return cur;
}

// Introduces a fresh role that waits for every final interaction of the left
// part before releasing every initial interaction of the right part.
inline ChorPtr connect_sequence(const ChorPtr& c, const Path& at, FreshSupply& fresh) {
  return connect_sequence_with(c, at, fresh.fresh_role(), fresh);
}

// ---------------------------------------------------------------------------
// Choice connection
// ---------------------------------------------------------------------------

// A fresh role announces the chosen branch to every initial sender.
inline ChorPtr connect_choice_cond1(const ChorPtr& c, const Path& at, FreshSupply& fresh) {
  ChorPtr sub = subterm_at(c, at);
  if (sub->kind != ChorKind::Choice || !detail::choice_violates_cond1(sub))
    throw PreconditionError("connect_choice_cond1: subterm is not a Choice lacking a unique deciding sender");
  Role e = fresh.fresh_role();
  ChorPtr cur = c;
  for (Step side : {Step::Left, Step::Right}) {
    ChorPtr branch = side == Step::Left ? sub->left : sub->right;
    for (const auto& [p, i] : trans_i(branch)) {
      Path full = detail::join_path(at, side, p);
      Operation f = fresh.fresh_op();
      ChorPtr leaf = subterm_at(cur, full);
      cur = replace_at(cur, full,
                       mk_seq(mk_interaction(Interaction{e, i.sender, f}), leaf));
    }
  }
  return cur;
}

// The deciding role notifies, in parallel, every role missing from a branch.
// The deciding role itself is never notified (it makes the choice).
inline ChorPtr connect_choice_cond2(const ChorPtr& c, const Path& at, FreshSupply& fresh) {
  ChorPtr sub = subterm_at(c, at);
  if (sub->kind != ChorKind::Choice)
    throw PreconditionError("connect_choice_cond2: subterm is not a Choice");
  if (detail::choice_violates_cond1(sub))
    throw PreconditionError("connect_choice_cond2: a unique deciding sender is required first");
  std::set<Role> lr = roles(sub->left), rr = roles(sub->right);
  if (lr == rr) return c;  // no-op
  auto initials = trans_i(sub->left);
  auto ri = trans_i(sub->right);
  initials.insert(initials.end(), ri.begin(), ri.end());
  if (initials.empty())
    throw NoCommonSender("connect_choice_cond2: choice has no initial interactions");
  Role e = initials.front().second.sender;

  ChorPtr cur = c;
  auto extend = [&](Step side, const std::set<Role>& present, const std::set<Role>& other) {
    ChorPtr branch = subterm_at(cur, detail::join_path(at, side, {}));
    bool changed = false;
    for (const Role& a : other) {
      if (present.count(a) || a == e) continue;
      branch = mk_par(branch, mk_interaction(Interaction{e, a, fresh.fresh_op()}));
      changed = true;
    }
    if (changed) cur = replace_at(cur, detail::join_path(at, side, {}), branch);
  };
  // roles present only on the right get announced into the left branch first
  extend(Step::Left, lr, rr);
  extend(Step::Right, rr, lr);
  return cur;
}

// ---------------------------------------------------------------------------
// Normal form and the expansion law
// ---------------------------------------------------------------------------

namespace detail {

struct NormalFormRepr;

struct Summand {
  Interaction head;
  // absent: the prefix has an empty (One) continuation
  std::shared_ptr<NormalFormRepr> cont;
};

struct NormalFormRepr {
  std::vector<Summand> summands;  // empty list = Zero
};

using NF = std::shared_ptr<NormalFormRepr>;

struct NfContext {
  FreshSupply& fresh;
  std::size_t budget;
  std::size_t used = 0;

  void charge(std::size_t n) {
    used += n;
    if (used > budget)
      throw CapExceeded("normal form expansion exceeded node budget of " +
                        std::to_string(budget));
  }
};

inline NF mk_nf(std::vector<Summand> ss, NfContext& ctx) {
  ctx.charge(1 + 2 * ss.size());
  return std::make_shared<NormalFormRepr>(NormalFormRepr{std::move(ss)});
}

inline NF nf_par(const NF& a, const NF& b, NfContext& ctx);

inline NF par_cont(const NF& cont, const NF& other, NfContext& ctx) {
  // absent continuation means One: 1 | other has the traces of other
  if (!cont) return other;
  return nf_par(cont, other, ctx);
}

// The expansion law, applied recursively: hoist each side's prefixes, keep the rest in
// parallel with the untouched other side.
inline NF nf_par(const NF& a, const NF& b, NfContext& ctx) {
  std::vector<Summand> out;
  for (const auto& s : a->summands) out.push_back(Summand{s.head, par_cont(s.cont, b, ctx)});
  for (const auto& s : b->summands) out.push_back(Summand{s.head, par_cont(s.cont, a, ctx)});
  return mk_nf(std::move(out), ctx);
}

inline NF nf_of(const ChorPtr& c, NfContext& ctx);

// (sum_i i;C_i);y  ==  sum_i i;(C_i;y)
inline NF nf_seq(const NF& a, const ChorPtr& y, NfContext& ctx) {
  std::vector<Summand> out;
  for (const auto& s : a->summands) {
    NF cont = s.cont ? nf_seq(s.cont, y, ctx) : nf_of(y, ctx);
    out.push_back(Summand{s.head, std::move(cont)});
  }
  return mk_nf(std::move(out), ctx);
}

inline NF nf_of(const ChorPtr& c, NfContext& ctx) {
  switch (c->kind) {
    case ChorKind::Interaction:
      return mk_nf({Summand{c->inter, nullptr}}, ctx);
    case ChorKind::One: {
      // One is replaced by a private interaction on fresh roles
      Role a = ctx.fresh.fresh_role();
      Role b = ctx.fresh.fresh_role();
      return mk_nf({Summand{Interaction{a, b, ctx.fresh.fresh_op()}, nullptr}}, ctx);
    }
    case ChorKind::Zero:
      return mk_nf({}, ctx);
    case ChorKind::Choice: {
      NF l = nf_of(c->left, ctx);
      NF r = nf_of(c->right, ctx);
      std::vector<Summand> out = l->summands;
      out.insert(out.end(), r->summands.begin(), r->summands.end());
      return mk_nf(std::move(out), ctx);
    }
    case ChorKind::Seq: {
      NF l = nf_of(c->left, ctx);
      return nf_seq(l, c->right, ctx);
    }
    case ChorKind::Par: {
      NF l = nf_of(c->left, ctx);
      NF r = nf_of(c->right, ctx);
      return nf_par(l, r, ctx);
    }
  }
  return nullptr;
}

inline ChorPtr nf_to_chor(const NF& nf, NfContext& ctx) {
  if (nf->summands.empty()) return mk_zero();
  ChorPtr out;
  for (auto it = nf->summands.rbegin(); it != nf->summands.rend(); ++it) {
    ctx.charge(2);  // continuations may be shared; count the unfolded tree
    ChorPtr head = mk_interaction(it->head);
    ChorPtr summand = it->cont ? mk_seq(head, nf_to_chor(it->cont, ctx)) : head;
    out = out ? mk_choice(summand, out) : summand;
  }
  return out;
}

}  // namespace detail

// Normal-form predicate: a sum of interaction-prefixed normal
// forms; a bare interaction is a prefix with empty continuation; the empty
// sum is Zero.
inline bool is_normal_form(const ChorPtr& c) {
  std::function<bool(const ChorPtr&)> is_sum = [&](const ChorPtr& t) -> bool {
    switch (t->kind) {
      case ChorKind::Interaction:
        return true;
      case ChorKind::Seq:
        return t->left->kind == ChorKind::Interaction &&
               (t->right->kind == ChorKind::Zero || is_sum(t->right));
      case ChorKind::Choice:
        return is_sum(t->left) && is_sum(t->right);
      default:
        return false;
    }
  };
  return c->kind == ChorKind::Zero || is_sum(c);
}

inline ChorPtr normal_form(const ChorPtr& c, FreshSupply& fresh,
                           std::size_t budget = 20000) {
  detail::NfContext ctx{fresh, budget};
  detail::NF nf = detail::nf_of(c, ctx);
  ctx.used = 0;
  return detail::nf_to_chor(nf, ctx);
}

// One application of the expansion law to two terms already in normal form.
inline ChorPtr expansion_law(const ChorPtr& left, const ChorPtr& right) {
  if (!is_normal_form(left) || !is_normal_form(right))
    throw PreconditionError("expansion_law: operands must be in normal form");
  if (left->kind == ChorKind::Zero || right->kind == ChorKind::Zero) return mk_zero();

  struct Piece {
    Interaction head;
    ChorPtr cont;  // null for a bare prefix
  };
  auto flatten = [](const ChorPtr& t) {
    std::vector<Piece> out;
    std::function<void(const ChorPtr&)> rec = [&](const ChorPtr& n) {
      if (n->kind == ChorKind::Choice) {
        rec(n->left);
        rec(n->right);
      } else if (n->kind == ChorKind::Seq) {
        out.push_back(Piece{n->left->inter, n->right});
      } else {
        out.push_back(Piece{n->inter, nullptr});
      }
    };
    rec(t);
    return out;
  };

  std::vector<ChorPtr> summands;
  for (const auto& [side, other] :
       {std::pair{left, right}, std::pair{right, left}}) {
    for (const auto& piece : flatten(side)) {
      ChorPtr remainder = piece.cont ? mk_par(piece.cont, other) : other;
      summands.push_back(mk_seq(mk_interaction(piece.head), remainder));
    }
  }
  ChorPtr out = summands.back();
  for (auto it = std::next(summands.rbegin()); it != summands.rend(); ++it)
    out = mk_choice(*it, out);
  return out;
}

// ---------------------------------------------------------------------------
// Causality fixes
// ---------------------------------------------------------------------------

// Appends a round-trip through the later receiver after the earlier
// interaction of a sequential causality issue.
inline ChorPtr fix_seq_causality(const ChorPtr& c, const Violation& v, FreshSupply& fresh) {
  if (v.kind != ViolationKind::CausalityUnsafe ||
      v.causality_class != CausalityClass::SequentialIssue)
    throw PreconditionError("fix_seq_causality: violation is not a SequentialIssue");
  if (v.endangered_first || !v.endangered_second)
    throw PreconditionError(
        "fix_seq_causality: issue direction requires connectedness for sequence");
  const Path& earlier = v.witness_paths[0];
  Role b = subterm_at(c, earlier)->inter.receiver;
  Role d = subterm_at(c, v.witness_paths[1])->inter.receiver;
  Operation f = fresh.fresh_op();
  Operation g = fresh.fresh_op();
  ChorPtr leaf = subterm_at(c, earlier);
  ChorPtr round_trip = mk_seq(mk_interaction(Interaction{b, d, f}),
                              mk_interaction(Interaction{d, b, g}));
  return replace_at(c, earlier, mk_seq(leaf, round_trip));
}

// Prefixes each endangered receive's interaction with a fresh round-trip
// between its own two roles.
inline ChorPtr fix_choice_causality(const ChorPtr& c, const Violation& v,
                                    FreshSupply& fresh) {
  if (v.kind != ViolationKind::CausalityUnsafe ||
      v.causality_class != CausalityClass::ChoiceIssue)
    throw PreconditionError("fix_choice_causality: violation is not a ChoiceIssue");
  if (!v.endangered_first && !v.endangered_second)
    throw PreconditionError("fix_choice_causality: no endangered receive recorded");
  ChorPtr cur = c;
  for (int side = 0; side < 2; ++side) {
    if (!(side == 0 ? v.endangered_first : v.endangered_second)) continue;
    const Path& p = v.witness_paths[side];
    ChorPtr leaf = subterm_at(cur, p);
    Role s = leaf->inter.sender, r = leaf->inter.receiver;
    Operation f = fresh.fresh_op();
    Operation g = fresh.fresh_op();
    cur = replace_at(cur, p,
                     mk_seq(mk_interaction(Interaction{s, r, f}),
                            mk_seq(mk_interaction(Interaction{r, s, g}), leaf)));
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Combined terminating amendment procedure
// ---------------------------------------------------------------------------

namespace detail {

inline bool contains_zero(const ChorPtr& c) {
  if (c->kind == ChorKind::Zero) return true;
  return c->left && (contains_zero(c->left) || contains_zero(c->right));
}

// deeper first, then lexicographic
inline bool subterm_order(const Path& a, const Path& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  return a < b;
}

}  // namespace detail

inline std::pair<ChorPtr, AmendReport> amend(const ChorPtr& input,
                                             const AmendConfig& config = {}) {
  if (detail::contains_zero(input))
    throw PreconditionError("amend: input contains the runtime-only term 0");
  FreshSupply fresh(input, config.fresh_prefix);
  AmendReport report;
  ChorPtr cur = input;

  // Steps carry the rewritten subterm only; splicing each `after` back in at
  // `at` replays the procedure (see replay_steps).
  auto record = [&](AmendPattern pattern, const Path& at, const ChorPtr& before,
                    const ChorPtr& after) {
    report.steps.push_back(
        AmendStep{pattern, at, render(subterm_at(before, at)), render(subterm_at(after, at))});
  };

  const std::size_t step_limit =
      1000 + 200 * leaves(input).size() * std::max<std::size_t>(config.max_rounds, 1);
  std::size_t steps_taken = 0;
  auto charge_step = [&] {
    if (++steps_taken > step_limit)
      throw NonConvergence("amend: rewrite step limit exhausted");
  };

#ifdef CHORC_AMEND_TRACE
  auto t_start = std::chrono::steady_clock::now();
  auto trace = [&](const char* tag) {
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    std::fprintf(stderr, "[amend] %7.2fs %s leaves=%zu\n", el, tag, leaves(cur).size());
  };
#else
  auto trace = [&](const char*) {};
#endif

  for (int round = 0; round < config.max_rounds; ++round) {
    // (1) normalize the smallest subterms with parallel causality issues
    for (;;) {
      auto ca = check_causality(cur);
      std::optional<Path> target;
      for (const auto& v : ca)
        if (v.causality_class == CausalityClass::ParallelIssue &&
            (!target || detail::subterm_order(v.subterm, *target)))
          target = v.subterm;
      if (!target) break;
      charge_step();
      ChorPtr before = cur;
      ChorPtr sub = subterm_at(cur, *target);
      cur = replace_at(cur, *target, normal_form(sub, fresh, config.expansion_budget));
      record(AmendPattern::Normalize, *target, before, cur);
    }
    trace("after normalize");

    // (2) connect sequences and choices. Each pass fixes every flagged node
    // on the current term, rechecking the node's own condition just before
    // its fix: a fix never moves another flagged node's path, but it can
    // satisfy other nodes' conditions along the way.
    // Connector roles: small terms get one fresh role per sequence fix (the
    // readable form). Past a size threshold every sequence fix shares a
    // single connector role instead: a distinct role per fix would leave
    // sibling choice branches with disjoint connector-role sets, and the
    // role-equalisation pass would then have to announce thousands of roles
    // into every branch. One shared coordinator keeps role sets aligned and
    // is just as sound — the connector only ever relays private hand-offs.
    std::optional<Role> shared_connector;
    const bool share_connectors = leaves(cur).size() > config.connector_share_threshold;
    for (;;) {
      auto seqs = check_sequence(cur);
      auto chs = check_choice(cur);
      if (seqs.empty() && chs.empty()) break;
      // sequences smallest-to-largest: a deeper node's initials and finals
      // must be settled before an enclosing node reads them
      std::stable_sort(seqs.begin(), seqs.end(), [](const Violation& a, const Violation& b) {
        return detail::subterm_order(a.subterm, b.subterm);
      });
      for (const Violation& v : seqs) {
        ChorPtr sub = subterm_at(cur, v.subterm);
        if (sub->kind != ChorKind::Seq || !detail::seq_violates(sub)) continue;
        charge_step();
        Role e;
        if (share_connectors) {
          if (!shared_connector) shared_connector = fresh.fresh_role();
          e = *shared_connector;
        } else {
          e = fresh.fresh_role();
        }
        ChorPtr before = cur;
        cur = connect_sequence_with(cur, v.subterm, e, fresh);
        record(AmendPattern::ConnectSeq, v.subterm, before, cur);
      }
      // Cond1 largest-to-smallest: one deciding role introduced at an
      // enclosing node usually satisfies the whole nested sum beneath it, and
      // its leaf prefixes never move another node's path
      std::stable_sort(chs.begin(), chs.end(), [](const Violation& a, const Violation& b) {
        if (a.subterm != b.subterm) return detail::subterm_order(b.subterm, a.subterm);
        return a.choice_cond < b.choice_cond;
      });
      const Path* choice_done = nullptr;
      for (const Violation& v : chs) {
        if (choice_done && *choice_done == v.subterm) continue;  // node handled once
        choice_done = &v.subterm;
        ChorPtr sub = subterm_at(cur, v.subterm);
        if (sub->kind != ChorKind::Choice || !detail::choice_violates_cond1(sub)) continue;
        charge_step();
        ChorPtr before = cur;
        cur = connect_choice_cond1(cur, v.subterm, fresh);
        record(AmendPattern::ConnectChoiceCond1, v.subterm, before, cur);
      }
      // Cond2 smallest-to-largest: its branch wrappers insert nodes above
      // everything beneath them, so deeper paths must be consumed first
      std::reverse(chs.begin(), chs.end());
      choice_done = nullptr;
      for (const Violation& v : chs) {
        if (choice_done && *choice_done == v.subterm) continue;
        choice_done = &v.subterm;
        ChorPtr sub = subterm_at(cur, v.subterm);
        if (sub->kind != ChorKind::Choice || detail::choice_violates_cond1(sub)) continue;
        if (roles(sub->left) == roles(sub->right)) continue;
        charge_step();
        ChorPtr before = cur;
        cur = connect_choice_cond2(cur, v.subterm, fresh);
        record(AmendPattern::ConnectChoiceCond2, v.subterm, before, cur);
      }
      trace("stage2 pass");
    }

    // (3) remaining sequential and choice causality issues. Each pass applies
    // every fix whose witness leaves are still untouched this pass; issues
    // whose leaves were already rewritten are re-examined on the next check,
    // since one inserted round-trip often resolves several pairs at once.
    std::vector<Violation> residual_causality;
    for (;;) {
      auto ca = check_causality(cur);
      std::stable_sort(ca.begin(), ca.end(), [](const Violation& a, const Violation& b) {
        if (a.causality_class != b.causality_class)
          return a.causality_class < b.causality_class;  // Sequential before Choice
        if (a.subterm != b.subterm) return a.subterm < b.subterm;
        return a.witness_paths < b.witness_paths;
      });
      std::set<Path> touched;
      bool fixed_any = false;
      for (const auto& v : ca) {
        if (v.causality_class == CausalityClass::ParallelIssue) continue;
        if (touched.count(v.witness_paths[0]) || touched.count(v.witness_paths[1]))
          continue;
        charge_step();
        ChorPtr before = cur;
        if (v.causality_class == CausalityClass::SequentialIssue) {
          cur = fix_seq_causality(cur, v, fresh);
          record(AmendPattern::FixSeqCausality, v.witness_paths[0], before, cur);
          touched.insert(v.witness_paths[0]);
        } else {
          cur = fix_choice_causality(cur, v, fresh);
          // one record per rewritten leaf
          if (v.endangered_first) {
            record(AmendPattern::FixChoiceCausality, v.witness_paths[0], before, cur);
            touched.insert(v.witness_paths[0]);
          }
          if (v.endangered_second) {
            record(AmendPattern::FixChoiceCausality, v.witness_paths[1], before, cur);
            touched.insert(v.witness_paths[1]);
          }
        }
        fixed_any = true;
      }
      trace("stage3 pass");
      if (!fixed_any) {  // clean, or only parallel issues: next round
        residual_causality = std::move(ca);
        break;
      }
    }

    // the last stage-3 check already covers causality on the current term
    if (residual_causality.empty() && check_sequence(cur).empty() &&
        check_choice(cur).empty())
      return {cur, std::move(report)};
  }

  auto residual = check_all(cur);
  std::string msg = "amend: " + std::to_string(residual.size()) +
                    " violation(s) remain after " + std::to_string(config.max_rounds) +
                    " round(s)";
  for (std::size_t i = 0; i < residual.size() && i < 3; ++i)
    msg += "; " + residual[i].kind_str() + " on " +
           (residual[i].witnesses.empty() ? "?" : residual[i].witnesses[0]);
  throw NonConvergence(msg);
}

// Rebuilds the amended term from the report by splicing each step's `after`
// subterm back in at its recorded path.
inline ChorPtr replay_steps(const ChorPtr& input, const AmendReport& report) {
  ChorPtr cur = input;
  for (const AmendStep& s : report.steps) cur = replace_at(cur, s.at, parse(s.after));
  return cur;
}

}  // namespace chorc
