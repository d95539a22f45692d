// skillmc — compiler and LTL model checker for skill-based robotic
// architectures.
//
// Commands:
//   parse    parse + validate a skillset file (--dump-ast prints canonical form)
//   compile  compile to the synchronized network; print the interface manifest
//   verify   check an LTL property against the closed network
//   explore  breadth-first reachability statistics of the (closed) network
//
// Exit codes: 0 success / property holds, 1 diagnostics or usage error,
// 2 I/O error, 3 property violated, 4 engine disagreement.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "skillmc/check.hpp"
#include "skillmc/compile.hpp"
#include "skillmc/layer.hpp"
#include "skillmc/ltl.hpp"
#include "skillmc/lts.hpp"
#include "skillmc/skillset.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiagnostics = 1;
constexpr int kExitIo = 2;
constexpr int kExitViolated = 3;
constexpr int kExitDisagree = 4;

struct CommonOpts {
  std::string skillset_path;
  std::vector<std::string> layer_paths;
  std::vector<std::string> builtins;
  bool auto_abstract = false;
  uint64_t max_states = 1'000'000;
  std::string format = "text";
  std::string dot_dir;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_layers) {
  // Required keeps greedy multi-value options (--layer, --builtin) from
  // swallowing the trailing positional.
  cmd->add_option("skillset,--skillset", o.skillset_path, "Skillset source file")->required();
  if (with_layers) {
    cmd->add_option("--layer", o.layer_paths, "Layer-model file (repeatable)");
    cmd->add_option("--builtin", o.builtins,
                    "Builtin layer model, e.g. refined-goto:Bmax=6,Dmax=2");
    cmd->add_flag("--auto-abstract", o.auto_abstract,
                  "Synthesize abstract models for uncovered interfaces");
  }
  cmd->add_option("--max-states", o.max_states, "State bound (default 1000000)");
  cmd->add_option("--format", o.format, "Output format: text|json")
      ->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--dot", o.dot_dir, "Write DOT files into this directory");
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open '" << path << "'\n";
    return std::nullopt;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    std::cerr << "error: cannot read '" << path << "'\n";
    return std::nullopt;
  }
  return ss.str();
}

void print_diags(const std::string& path, const skillmc::Diagnostics& diags) {
  for (const auto& d : diags) std::cerr << path << ":" << skillmc::to_string(d) << "\n";
}

std::optional<skillmc::SkillsetAst> load_skillset(const CommonOpts& o, int& rc) {
  if (o.skillset_path.empty()) {
    std::cerr << "error: no skillset file given\n";
    rc = kExitDiagnostics;
    return std::nullopt;
  }
  auto text = read_file(o.skillset_path);
  if (!text) {
    rc = kExitIo;
    return std::nullopt;
  }
  auto parsed = skillmc::parse_skillset(*text);
  print_diags(o.skillset_path, parsed.diagnostics);
  if (!parsed.ok()) {
    rc = kExitDiagnostics;
    return std::nullopt;
  }
  return std::move(parsed.ast);
}

std::optional<skillmc::CompiledSkillset> load_compiled(const CommonOpts& o, int& rc) {
  auto ast = load_skillset(o, rc);
  if (!ast) return std::nullopt;
  auto compiled = skillmc::compile_skillset(*ast);
  print_diags(o.skillset_path, compiled.diagnostics);
  if (!compiled.ok()) {
    rc = kExitDiagnostics;
    return std::nullopt;
  }
  return std::move(compiled.compiled);
}

/// Parses "refined-goto:Bmax=6,Dmax=2[,skill=goto,battery=battery,
/// normal=Normal,critical=Critical]".
std::optional<skillmc::GuardedTs> parse_builtin(const std::string& spec) {
  std::string name = spec;
  std::string params;
  if (auto colon = spec.find(':'); colon != std::string::npos) {
    name = spec.substr(0, colon);
    params = spec.substr(colon + 1);
  }
  if (name != "refined-goto") {
    std::cerr << "error: unknown builtin '" << name << "' (supported: refined-goto)\n";
    return std::nullopt;
  }
  int bmax = 6, dmax = 2;
  std::string skill = "goto", battery = "battery", normal = "Normal", critical = "Critical";
  std::stringstream ss(params);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: builtin parameter '" << item << "' is not key=value\n";
      return std::nullopt;
    }
    std::string key = item.substr(0, eq);
    std::string val = item.substr(eq + 1);
    try {
      if (key == "Bmax")
        bmax = std::stoi(val);
      else if (key == "Dmax")
        dmax = std::stoi(val);
      else if (key == "skill")
        skill = val;
      else if (key == "battery")
        battery = val;
      else if (key == "normal")
        normal = val;
      else if (key == "critical")
        critical = val;
      else {
        std::cerr << "error: unknown builtin parameter '" << key << "'\n";
        return std::nullopt;
      }
    } catch (const std::exception&) {
      std::cerr << "error: builtin parameter '" << item << "' has a bad value\n";
      return std::nullopt;
    }
  }
  try {
    return skillmc::builtin_refined_goto(bmax, dmax, skill, battery, normal, critical);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

/// Builds the verification network. With no layer/builtin/auto-abstract flags
/// the bare compiled network is returned; otherwise the closed network.
std::optional<skillmc::Network> build_network(const CommonOpts& o,
                                              const skillmc::CompiledSkillset& cs, int& rc) {
  bool attach = o.auto_abstract || !o.layer_paths.empty() || !o.builtins.empty();
  if (!attach) return cs.network;
  std::vector<skillmc::GuardedTs> models;
  for (const auto& path : o.layer_paths) {
    auto text = read_file(path);
    if (!text) {
      rc = kExitIo;
      return std::nullopt;
    }
    auto parsed = skillmc::parse_layer_model(*text);
    print_diags(path, parsed.diagnostics);
    if (!parsed.ok()) {
      rc = kExitDiagnostics;
      return std::nullopt;
    }
    models.push_back(std::move(*parsed.model));
  }
  for (const auto& spec : o.builtins) {
    auto model = parse_builtin(spec);
    if (!model) {
      rc = kExitDiagnostics;
      return std::nullopt;
    }
    models.push_back(std::move(*model));
  }
  skillmc::AttachOptions opts;
  opts.auto_abstract = o.auto_abstract;
  opts.expand_bound = o.max_states;
  auto closed = skillmc::close_network(cs, models, opts);
  print_diags(o.skillset_path, closed.diagnostics);
  if (!closed.ok()) {
    rc = kExitDiagnostics;
    return std::nullopt;
  }
  return std::move(closed.closed->network);
}

int write_dot_files(const std::string& dir, const skillmc::Network& net,
                    const std::string& combined_name, const std::string& combined_text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create directory '" << dir << "': " << ec.message() << "\n";
    return kExitIo;
  }
  auto write_one = [&](const std::string& file, const std::string& text) -> bool {
    std::ofstream out(std::filesystem::path(dir) / file, std::ios::binary);
    out << text;
    if (!out) {
      std::cerr << "error: cannot write '" << dir << "/" << file << "'\n";
      return false;
    }
    return true;
  };
  for (const auto& c : net.components())
    if (!write_one(c.name() + ".dot", skillmc::export_dot(c))) return kExitIo;
  if (!combined_name.empty() && !write_one(combined_name, combined_text)) return kExitIo;
  return kExitOk;
}

int cmd_parse(const CommonOpts& o, bool dump_ast) {
  int rc = kExitOk;
  auto ast = load_skillset(o, rc);
  if (!ast) return rc;
  if (dump_ast) {
    std::cout << skillmc::format_skillset(*ast);
    return kExitOk;
  }
  if (o.format == "json") {
    nlohmann::ordered_json j;
    j["skillset"] = ast->name;
    j["resources"] = nlohmann::ordered_json::array();
    for (const auto& r : ast->resources) j["resources"].push_back(r.name);
    j["skills"] = nlohmann::ordered_json::array();
    for (const auto& s : ast->skills) j["skills"].push_back(s.name);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "ok: skillset " << ast->name << " (" << ast->skills.size() << " skill"
              << (ast->skills.size() == 1 ? "" : "s") << ", " << ast->resources.size()
              << " resource" << (ast->resources.size() == 1 ? "" : "s") << ")\n";
  }
  return kExitOk;
}

int cmd_compile(const CommonOpts& o) {
  int rc = kExitOk;
  auto cs = load_compiled(o, rc);
  if (!cs) return rc;
  if (!o.dot_dir.empty()) {
    int drc = write_dot_files(o.dot_dir, cs->network, "network.dot", skillmc::compiled_dot(*cs));
    if (drc != kExitOk) return drc;
  }
  if (o.format == "json") {
    std::cout << skillmc::manifest_json(*cs);
  } else {
    std::cout << "skillset " << cs->name << "\n";
    for (const auto& s : cs->skills) {
      std::cout << "  skill " << s.skill << "\n    functional interface:";
      for (const auto& e : s.functional_interface()) std::cout << " " << e;
      std::cout << "\n    decision interface:";
      for (const auto& e : s.decision_interface()) std::cout << " " << e;
      std::cout << "\n";
    }
    for (const auto& r : cs->resources) {
      std::cout << "  resource " << r.name << " (initial " << r.initial << "):";
      for (const auto& s : r.states) std::cout << " " << s;
      std::cout << "\n    autonomous:";
      for (const auto& e : r.autonomous_events) std::cout << " " << e;
      std::cout << "\n";
    }
    const auto& net = cs->network;
    std::cout << "  network: " << net.components().size() << " components, "
              << net.events().size() << " events\n";
  }
  return kExitOk;
}

int cmd_verify(const CommonOpts& o, const std::string& prop, const std::string& engine_name,
               bool timings) {
  int rc = kExitOk;
  auto cs = load_compiled(o, rc);
  if (!cs) return rc;
  auto net = build_network(o, *cs, rc);
  if (!net) return rc;
  if (!o.dot_dir.empty()) {
    int drc = write_dot_files(o.dot_dir, *net, "", "");
    if (drc != kExitOk) return drc;
  }

  std::string prop_text = prop;
  if (!prop_text.empty() && prop_text[0] == '@') {
    auto text = read_file(prop_text.substr(1));
    if (!text) return kExitIo;
    prop_text = *text;
  }
  auto parsed = skillmc::parse_ltl(prop_text);
  print_diags("<property>", parsed.diagnostics);
  if (!parsed.formula) return kExitDiagnostics;

  auto run = [&](skillmc::Engine e) {
    auto t0 = std::chrono::steady_clock::now();
    skillmc::Verdict v = skillmc::model_check(*net, *parsed.formula, e, o.max_states);
    auto t1 = std::chrono::steady_clock::now();
    v.time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return v;
  };

  try {
    skillmc::Verdict verdict;
    if (engine_name == "ndfs") {
      verdict = run(skillmc::Engine::Ndfs);
    } else if (engine_name == "scc") {
      verdict = run(skillmc::Engine::Scc);
    } else {
      skillmc::Verdict a = run(skillmc::Engine::Ndfs);
      skillmc::Verdict b = run(skillmc::Engine::Scc);
      if (a.holds != b.holds) {
        std::cerr << "error: engine disagreement: ndfs says "
                  << (a.holds ? "holds" : "violated") << ", scc says "
                  << (b.holds ? "holds" : "violated") << "\n";
        return kExitDisagree;
      }
      verdict = std::move(a);
    }
    if (o.format == "json")
      std::cout << skillmc::verdict_json(*net, verdict, timings);
    else
      std::cout << skillmc::verdict_text(*net, verdict, timings);
    return verdict.holds ? kExitOk : kExitViolated;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
}

int cmd_explore(const CommonOpts& o) {
  int rc = kExitOk;
  auto cs = load_compiled(o, rc);
  if (!cs) return rc;
  auto net = build_network(o, *cs, rc);
  if (!net) return rc;
  if (!o.dot_dir.empty()) {
    int drc = write_dot_files(o.dot_dir, *net, "", "");
    if (drc != kExitOk) return drc;
  }
  try {
    skillmc::ReachStats stats = net->reachable(o.max_states);
    if (o.format == "json") {
      nlohmann::ordered_json j;
      j["states"] = stats.states;
      j["transitions"] = stats.transitions;
      j["deadlocks"] = stats.deadlocks;
      j["truncated"] = stats.truncated;
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "states: " << stats.states << "\ntransitions: " << stats.transitions
                << "\ndeadlocks: " << stats.deadlocks << "\ntruncated: "
                << (stats.truncated ? "yes" : "no") << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compiler and LTL model checker for skill-based robotic architectures"};
  app.require_subcommand(1);

  CommonOpts parse_opts;
  bool dump_ast = false;
  CLI::App* parse_cmd = app.add_subcommand("parse", "Parse and validate a skillset file");
  add_common(parse_cmd, parse_opts, /*with_layers=*/false);
  parse_cmd->add_flag("--dump-ast", dump_ast, "Print the canonical form of the skillset");

  CommonOpts compile_opts;
  CLI::App* compile_cmd =
      app.add_subcommand("compile", "Compile a skillset to its synchronized network");
  add_common(compile_cmd, compile_opts, /*with_layers=*/false);

  CommonOpts verify_opts;
  std::string prop;
  std::string engine = "both";
  bool timings = false;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Check an LTL property");
  add_common(verify_cmd, verify_opts, /*with_layers=*/true);
  verify_cmd->add_option("--prop", prop, "LTL property text, or @FILE")->required();
  verify_cmd->add_option("--engine", engine, "Model-checking engine (default both)")
      ->check(CLI::IsMember({"ndfs", "scc", "both"}));
  verify_cmd->add_flag("--timings", timings, "Include wall-clock time in the output");

  CommonOpts explore_opts;
  CLI::App* explore_cmd = app.add_subcommand("explore", "Reachability statistics");
  add_common(explore_cmd, explore_opts, /*with_layers=*/true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitDiagnostics;
  }

  try {
    if (parse_cmd->parsed()) return cmd_parse(parse_opts, dump_ast);
    if (compile_cmd->parsed()) return cmd_compile(compile_opts);
    if (verify_cmd->parsed()) return cmd_verify(verify_opts, prop, engine, timings);
    if (explore_cmd->parsed()) return cmd_explore(explore_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  return kExitOk;
}
