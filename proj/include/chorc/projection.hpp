#pragma once

#include <algorithm>
#include <vector>

#include "chorc/endpoint.hpp"
#include "chorc/errors.hpp"
#include "chorc/syntax.hpp"

namespace chorc {

// Project a choreography onto a single role. Interactions become the role's
// local send or receive (or skip, as 1, when the role is not involved);
// composition operators project homomorphically.
inline ProcPtr project_role(const ChorPtr& c, const Role& r) {
  switch (c->kind) {
    case ChorKind::Interaction:
      if (c->inter.sender == r) return mk_output(c->inter.op);
      if (c->inter.receiver == r) return mk_input(c->inter.op);
      return proc_one();
    case ChorKind::One:
      return proc_one();
    case ChorKind::Zero:
      return proc_zero();
    case ChorKind::Seq:
      return mk_pseq(project_role(c->left, r), project_role(c->right, r));
    case ChorKind::Par:
      return mk_ppar(project_role(c->left, r), project_role(c->right, r));
    case ChorKind::Choice:
      return mk_pchoice(project_role(c->left, r), project_role(c->right, r));
  }
  return proc_one();
}

// Project onto every role of the choreography, in role name order.
inline EndpointSystem project(const ChorPtr& c) {
  std::set<Role> rs = roles(c);
  if (rs.empty())
    throw EmptyChoreography("cannot project a choreography with no roles");
  EndpointSystem sys;
  for (const Role& r : rs) sys.roles.emplace_back(r, project_role(c, r));
  return sys;
}

}  // namespace chorc
