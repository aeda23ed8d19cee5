#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "chorc/syntax.hpp"

namespace testutil {

using namespace chorc;

// ---------------------------------------------------------------------------
// Structural equality modulo associativity of ;/|/+ and a bijective renaming
// of names outside a fixed base set (role and operation namespaces are kept
// separate; visibility must match).
// ---------------------------------------------------------------------------

struct FlatNode {
  // Interaction/One/Zero leaf, or an n-ary Seq/Par/Choice.
  ChorKind kind;
  Interaction inter;
  std::vector<FlatNode> children;
};

inline void flatten_into(const ChorPtr& c, ChorKind op, std::vector<FlatNode>& out);

inline FlatNode flatten(const ChorPtr& c) {
  switch (c->kind) {
    case ChorKind::Interaction:
      return {ChorKind::Interaction, c->inter, {}};
    case ChorKind::One:
      return {ChorKind::One, {}, {}};
    case ChorKind::Zero:
      return {ChorKind::Zero, {}, {}};
    default: {
      FlatNode n{c->kind, {}, {}};
      flatten_into(c, c->kind, n.children);
      return n;
    }
  }
}

inline void flatten_into(const ChorPtr& c, ChorKind op, std::vector<FlatNode>& out) {
  if (c->kind == op) {
    flatten_into(c->left, op, out);
    flatten_into(c->right, op, out);
  } else {
    out.push_back(flatten(c));
  }
}

struct NameBijection {
  std::set<std::string> base;
  std::map<std::string, std::string> fwd, bwd;

  bool match(const std::string& a, const std::string& b) {
    bool ab = base.count(a), bb = base.count(b);
    if (ab || bb) return ab && bb && a == b;
    auto f = fwd.find(a);
    auto g = bwd.find(b);
    if (f == fwd.end() && g == bwd.end()) {
      fwd[a] = b;
      bwd[b] = a;
      return true;
    }
    return f != fwd.end() && g != bwd.end() && f->second == b && g->second == a;
  }
};

inline bool alpha_eq_rec(const FlatNode& a, const FlatNode& b, NameBijection& roles,
                         NameBijection& ops) {
  if (a.kind != b.kind) return false;
  if (a.kind == ChorKind::Interaction) {
    if (a.inter.op.visibility != b.inter.op.visibility) return false;
    return roles.match(a.inter.sender.name, b.inter.sender.name) &&
           roles.match(a.inter.receiver.name, b.inter.receiver.name) &&
           ops.match(a.inter.op.name, b.inter.op.name);
  }
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!alpha_eq_rec(a.children[i], b.children[i], roles, ops)) return false;
  return true;
}

// Names in `base_roles`/`base_ops` must match literally; all other names must
// correspond one-to-one.
inline bool alpha_equivalent(const ChorPtr& a, const ChorPtr& b,
                             const std::set<std::string>& base_roles,
                             const std::set<std::string>& base_ops) {
  NameBijection roles{base_roles, {}, {}};
  NameBijection ops{base_ops, {}, {}};
  FlatNode fa = flatten(a), fb = flatten(b);
  return alpha_eq_rec(fa, fb, roles, ops);
}

// Convenience: base names are exactly those occurring in `original`.
inline bool alpha_equivalent_over(const ChorPtr& a, const ChorPtr& b,
                                  const ChorPtr& original) {
  std::set<std::string> br, bo;
  for (const auto& [path, inter] : leaves(original)) {
    br.insert(inter.sender.name);
    br.insert(inter.receiver.name);
    bo.insert(inter.op.name);
  }
  return alpha_equivalent(a, b, br, bo);
}

// ---------------------------------------------------------------------------
// Random choreography generation
// ---------------------------------------------------------------------------

struct GenConfig {
  int max_interactions = 8;
  int max_roles = 6;
  int max_public_ops = 4;
  int max_depth = 4;
  bool allow_one = true;
};

class Gen {
 public:
  Gen(std::uint64_t seed, GenConfig cfg = {}) : rng_(seed), cfg_(cfg) {
    for (int i = 0; i < cfg_.max_roles; ++i)
      roles_.push_back(Role{std::string(1, char('a' + i))});
    for (int i = 0; i < cfg_.max_public_ops; ++i)
      ops_.push_back(Operation{"o" + std::to_string(i + 1), Visibility::Public});
  }

  ChorPtr choreography() {
    budget_ = 1 + static_cast<int>(rng_() % cfg_.max_interactions);
    ChorPtr c = term(cfg_.max_depth);
    return c ? c : interaction();
  }

  // A term already in normal form: a sum of interaction-prefixed normal
  // forms. Kept small so parallel compositions stay enumerable.
  ChorPtr normal_form_term(int depth = 3) {
    budget_ = 1 + static_cast<int>(rng_() % 5);
    return nf_term(depth);
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  ChorPtr interaction() {
    Role s = roles_[rng_() % roles_.size()];
    Role r = s;
    while (r == s) r = roles_[rng_() % roles_.size()];
    return mk_interaction(Interaction{s, r, ops_[rng_() % ops_.size()]});
  }

  ChorPtr term(int depth) {
    if (budget_ <= 0) return cfg_.allow_one ? mk_one() : nullptr;
    if (depth == 0 || rng_() % 4 == 0) {
      if (cfg_.allow_one && rng_() % 8 == 0) return mk_one();
      --budget_;
      return interaction();
    }
    ChorPtr l = term(depth - 1);
    ChorPtr r = term(depth - 1);
    if (!l) return r;
    if (!r) return l;
    switch (rng_() % 3) {
      case 0: return mk_seq(l, r);
      case 1: return mk_par(l, r);
      default: return mk_choice(l, r);
    }
  }

  ChorPtr nf_term(int depth) {
    int branches = 1 + static_cast<int>(rng_() % 2);
    ChorPtr acc = nf_summand(depth);
    for (int i = 1; i < branches && budget_ > 0; ++i)
      acc = mk_choice(acc, nf_summand(depth));
    return acc;
  }

  ChorPtr nf_summand(int depth) {
    --budget_;
    ChorPtr head = interaction();
    if (depth == 0 || budget_ <= 0 || rng_() % 3 == 0)
      return head;  // continuation 1, elided
    return mk_seq(head, nf_term(depth - 1));
  }

  std::mt19937_64 rng_;
  GenConfig cfg_;
  std::vector<Role> roles_;
  std::vector<Operation> ops_;
  int budget_ = 0;
};

}  // namespace testutil
