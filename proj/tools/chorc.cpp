// chorc: choreography checker, amender, projector, and trace comparer.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "chorc/amend.hpp"
#include "chorc/analysis.hpp"
#include "chorc/endpoint.hpp"
#include "chorc/equivalence.hpp"
#include "chorc/errors.hpp"
#include "chorc/projection.hpp"
#include "chorc/semantics.hpp"
#include "chorc/serialize.hpp"
#include "chorc/syntax.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailed = 1;
constexpr int kExitParseError = 2;
constexpr int kExitResource = 3;

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

chorc::ChorPtr parse_file(const std::string& path) {
  return chorc::parse(read_file(path));
}

int run_check(const std::string& file, bool advise_rename) {
  chorc::ChorPtr c = parse_file(file);
  std::vector<chorc::Violation> vs = chorc::check_all(c);
  chorc::json out = chorc::violations_to_json(vs);
  if (advise_rename) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (vs[i].kind != chorc::ViolationKind::CausalityUnsafe) continue;
      out[i]["advice"] =
          "renaming the operation in one of the witness interactions removes "
          "this causality conflict";
    }
  }
  std::cout << out.dump(2) << "\n";
  return vs.empty() ? kExitOk : kExitPropertyFailed;
}

int run_amend(const std::string& file, const chorc::AmendConfig& config,
              const std::string& report_path) {
  chorc::ChorPtr c = parse_file(file);
  auto [amended, report] = chorc::amend(c, config);
  std::cout << chorc::render(amended) << "\n";
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write report: " + report_path);
    out << chorc::report_to_json(report).dump(2) << "\n";
  }
  return kExitOk;
}

int run_project(const std::string& file, bool force) {
  chorc::ChorPtr c = parse_file(file);
  std::vector<chorc::Violation> vs = chorc::check_all(c);
  if (!vs.empty() && !force) {
    std::cerr << "warning: input is not connected (" << vs.size()
              << " violation(s)); projection is only meaningful for connected "
                 "choreographies. Use --force to project anyway.\n";
    return kExitPropertyFailed;
  }
  std::cout << chorc::render_system(chorc::project(c)) << "\n";
  return kExitOk;
}

int run_traces(const std::string& file, const std::string& mode, bool weak,
               std::uint64_t cap) {
  chorc::ChorPtr c = parse_file(file);
  chorc::json out;
  if (mode == "chor") {
    out = chorc::traces_to_json(weak ? chorc::weak_traces(c, cap)
                                     : chorc::strong_traces(c, cap));
  } else {
    chorc::SemanticsMode m =
        mode == "sync" ? chorc::SemanticsMode::Sync : chorc::SemanticsMode::Async;
    chorc::EndpointSystem sys = chorc::project(c);
    out = chorc::sys_traces_to_json(weak ? chorc::sys_weak_traces(sys, m, cap)
                                         : chorc::sys_strong_traces(sys, m, cap));
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int run_verify(const std::string& file_a, const std::string& file_b, bool weak,
               std::uint64_t cap) {
  chorc::ChorPtr a = parse_file(file_a);
  chorc::ChorPtr b = parse_file(file_b);
  bool eq = chorc::chor_equiv(
      a, b, weak ? chorc::EquivMode::Weak : chorc::EquivMode::Strong, cap);
  chorc::json out;
  out["equal"] = eq;
  out["mode"] = weak ? "weak" : "strong";
  std::cout << out.dump(2) << "\n";
  return eq ? kExitOk : kExitPropertyFailed;
}

int run_conformance(const std::string& file, std::uint64_t cap) {
  chorc::ChorPtr c = parse_file(file);
  chorc::ConformanceResult r = chorc::proj_conformance(c, cap);
  chorc::json out;
  out["sync_strong_equal"] = r.sync_strong_equal;
  if (r.counterexample) out["counterexample"] = chorc::trace_to_json(*r.counterexample);
  std::cout << out.dump(2) << "\n";
  return r.sync_strong_equal ? kExitOk : kExitPropertyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"choreography toolkit: connectedness checking, amendment, "
               "projection, and trace equivalence"};
  app.require_subcommand(1);

  std::uint64_t cap = chorc::kDefaultTraceCap;
  chorc::AmendConfig config;
  std::string report_path;
  bool weak = false, strong = false, force = false, advise_rename = false;
  std::string mode = "chor";
  std::string file, file_b;

  auto add_cap = [&](CLI::App* cmd) {
    cmd->add_option("--cap", cap, "maximum number of traces to enumerate");
  };
  auto add_weak_strong = [&](CLI::App* cmd) {
    auto* w = cmd->add_flag("--weak", weak, "compare weak traces");
    cmd->add_flag("--strong", strong, "compare strong traces")->excludes(w);
  };

  CLI::App* check = app.add_subcommand("check", "report connectedness violations");
  check->add_option("file", file, "choreography file (- for stdin)")->required();
  check->add_flag("--advise-rename", advise_rename,
                  "note causality violations fixable by renaming an operation");

  CLI::App* amend = app.add_subcommand("amend", "rewrite into a connected choreography");
  amend->add_option("file", file)->required();
  amend->add_option("--max-rounds", config.max_rounds);
  amend->add_option("--expansion-budget", config.expansion_budget);
  amend->add_option("--fresh-prefix", config.fresh_prefix);
  amend->add_option("--emit-report", report_path, "write the rewrite steps as JSON");

  CLI::App* project = app.add_subcommand("project", "project onto endpoint processes");
  project->add_option("file", file)->required();
  project->add_flag("--force", force, "project even when violations are present");

  CLI::App* traces = app.add_subcommand("traces", "enumerate traces as JSON");
  traces->add_option("file", file)->required();
  traces->add_option("--mode", mode, "chor | sync | async")
      ->check(CLI::IsMember({"chor", "sync", "async"}));
  traces->add_flag("--weak", weak, "erase private-operation labels");
  add_cap(traces);

  CLI::App* verify = app.add_subcommand("verify", "trace equivalence of two choreographies");
  verify->add_option("fileA", file)->required();
  verify->add_option("fileB", file_b)->required();
  add_weak_strong(verify);
  add_cap(verify);

  CLI::App* conformance =
      app.add_subcommand("conformance", "compare a choreography with its projection");
  conformance->add_option("file", file)->required();
  add_cap(conformance);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return run_check(file, advise_rename);
    if (amend->parsed()) return run_amend(file, config, report_path);
    if (project->parsed()) return run_project(file, force);
    if (traces->parsed()) return run_traces(file, mode, weak, cap);
    if (verify->parsed()) return run_verify(file, file_b, weak || !strong, cap);
    if (conformance->parsed()) return run_conformance(file, cap);
  } catch (const chorc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const chorc::CapExceeded& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitResource;
  } catch (const chorc::NonConvergence& e) {
    std::cerr << "amendment did not converge: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseError;
  }
  return kExitOk;
}
