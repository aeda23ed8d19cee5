#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "chorc/amend.hpp"
#include "chorc/analysis.hpp"
#include "chorc/endpoint.hpp"
#include "chorc/semantics.hpp"

namespace chorc {

using json = nlohmann::json;

inline std::string label_str(const ChorLabel& l) {
  return l.tick ? std::string("TICK") : render_interaction(l.comm);
}

inline json trace_to_json(const Trace& t) {
  json arr = json::array();
  for (const ChorLabel& l : t) arr.push_back(label_str(l));
  return arr;
}

inline json traces_to_json(const TraceSet& ts) {
  json arr = json::array();
  for (const Trace& t : ts) arr.push_back(trace_to_json(t));
  return arr;
}

inline json sys_trace_to_json(const SysTrace& t) {
  json arr = json::array();
  for (const SysLabel& l : t) arr.push_back(l.str());
  return arr;
}

inline json sys_traces_to_json(const SysTraceSet& ts) {
  json arr = json::array();
  for (const SysTrace& t : ts) arr.push_back(sys_trace_to_json(t));
  return arr;
}

inline json path_to_json(const Path& p) {
  json arr = json::array();
  for (Step s : p) arr.push_back(static_cast<int>(s));
  return arr;
}

inline json violation_to_json(const Violation& v) {
  json j;
  j["kind"] = v.kind_str();
  j["path"] = path_to_json(v.subterm);
  if (v.kind == ViolationKind::ChoiceNotUniquePoint)
    j["which"] = v.choice_cond == ChoiceCond::Cond1 ? "Cond1" : "Cond2";
  if (v.kind == ViolationKind::CausalityUnsafe) {
    switch (v.causality_class) {
      case CausalityClass::ParallelIssue: j["class"] = "ParallelIssue"; break;
      case CausalityClass::SequentialIssue: j["class"] = "SequentialIssue"; break;
      case CausalityClass::ChoiceIssue: j["class"] = "ChoiceIssue"; break;
    }
  }
  json ws = json::array();
  for (std::size_t i = 0; i < v.witnesses.size(); ++i) ws.push_back(v.witnesses[i]);
  j["witnesses"] = ws;
  json wp = json::array();
  for (const Path& p : v.witness_paths) wp.push_back(path_to_json(p));
  j["witness_paths"] = wp;
  return j;
}

inline json violations_to_json(const std::vector<Violation>& vs) {
  json arr = json::array();
  for (const Violation& v : vs) arr.push_back(violation_to_json(v));
  return arr;
}

inline json report_to_json(const AmendReport& r) {
  json steps = json::array();
  for (const AmendStep& s : r.steps) {
    json j;
    j["pattern"] = pattern_name(s.pattern);
    j["at"] = path_to_json(s.at);
    j["before"] = s.before;
    j["after"] = s.after;
    steps.push_back(j);
  }
  json out;
  out["steps"] = steps;
  return out;
}

}  // namespace chorc
