// pcs: summarize framework IR into predicate-callback summaries and apply
// them to app code.
//
// Exit codes: 0 success, 1 input or parse failure, 2 internal invariant
// violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcs/apply.hpp"
#include "pcs/dot.hpp"
#include "pcs/ir_parser.hpp"
#include "pcs/pipeline.hpp"
#include "pcs/store.hpp"

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::vector<std::string> inputs;
  std::vector<std::string> apis;
  int max_chain = 16;
  int max_callers = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
  int bound = 16;
  std::string format = "json";
  std::string templates;
  std::string output;
  std::string kind = "pcs";
  bool infeasible = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

pcs::ir::Program parse_inputs(const std::vector<std::string>& paths) {
  std::vector<pcs::ir::SourceFile> files;
  for (const auto& p : paths) files.push_back({p, read_file(p)});
  auto r = pcs::ir::parse_sources(files);
  if (!r.ok()) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += d.str() + "\n";
    throw InputError(msg + std::to_string(r.diagnostics.size()) + " error(s)");
  }
  return std::move(*r.program);
}

void emit(const Config& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  pcs::dot::write_file(c.output, text);
}

pcs::pipeline::SummarizeOptions summarize_options(const Config& c) {
  pcs::pipeline::SummarizeOptions o;
  o.bounds = {c.max_chain, c.max_callers, c.seed};
  o.jobs = c.jobs;
  o.apis = c.apis;
  if (!c.templates.empty()) {
    try {
      o.templates = pcs::updates::parse_template_table(read_file(c.templates));
    } catch (const std::runtime_error& e) {
      throw InputError(c.templates + ": " + e.what());
    }
  }
  if (c.max_chain < 1 || c.max_callers < 1) throw InputError("--max-chain and --max-callers must be >= 1");
  return o;
}

int run_summarize(const Config& c) {
  auto program = parse_inputs(c.inputs);
  pcs::pipeline::SummarizeResult r;
  try {
    r = pcs::pipeline::summarize(program, summarize_options(c));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  for (const auto& d : r.diagnostics) std::cerr << d << "\n";
  if (!r.violations.empty()) {
    std::string msg;
    for (const auto& v : r.violations) msg += v + "\n";
    throw InvariantError(msg);
  }
  std::ostream& stats = c.output.empty() ? std::cerr : std::cout;
  stats << pcs::pipeline::stats_header() << "\n";
  for (const auto& s : r.stats) stats << pcs::pipeline::stats_line(s) << "\n";
  if (c.format == "json") {
    emit(c, pcs::store::dump(r.store));
  } else if (c.format == "dot") {
    std::string out;
    for (const auto& [id, p] : r.store.summaries) out += pcs::dot::pcs_to_dot(p);
    emit(c, out);
  }
  return 0;
}

struct AppInputs {
  pcs::store::SummaryStore store;
  pcs::ir::Program program;
};

AppInputs load_app(const Config& c) {
  if (c.inputs.size() < 2) throw InputError("expected STORE followed by IR files");
  pcs::store::SummaryStore s;
  try {
    s = pcs::store::load_store(c.inputs[0]);
  } catch (const pcs::store::StoreError& e) {
    throw InputError(c.inputs[0] + ": " + e.what());
  }
  return {std::move(s), parse_inputs({c.inputs.begin() + 1, c.inputs.end()})};
}

pcs::apply::ApplyResult apply_inputs(const Config& c, const AppInputs& in, bool infeasible) {
  auto ctx = pcs::client::make_context(in.program, in.store);
  pcs::apply::ApplyOptions o;
  o.jobs = c.jobs;
  o.bound = c.bound;
  o.infeasible = infeasible;
  if (c.bound < 1) throw InputError("--bound must be >= 1");
  auto r = pcs::apply::run(ctx, o);
  for (const auto& t : r.tops)
    for (const auto& d : t.graph.diagnostics) std::cerr << t.top->qualified_name() << ": " << d << "\n";
  return r;
}

std::string reports_text(const pcs::apply::ApplyResult& r) {
  std::string out;
  for (const auto& t : r.tops)
    for (const auto& rep : t.reports) {
      out += "infeasible: " + rep.description + "\n  witness:";
      for (int n : rep.witness) out += "\n    " + t.graph.label(n);
      out += "\n";
    }
  return out;
}

int run_apply(const Config& c) {
  AppInputs in = load_app(c);
  auto r = apply_inputs(c, in, c.infeasible);
  if (c.format == "dot") {
    if (c.output.empty()) {
      for (const auto& t : r.tops) std::cout << pcs::client::to_dot(t.graph);
    } else {
      std::filesystem::create_directories(c.output);
      for (const auto& t : r.tops)
        pcs::dot::write_file((std::filesystem::path(c.output) / (t.top->qualified_name() + ".dot")).string(),
                             pcs::client::to_dot(t.graph));
    }
  }
  // Stats share stdout only when the main output went to a file.
  std::ostream& stats = c.output.empty() ? std::cerr : std::cout;
  stats << pcs::apply::stats_header() << "\n";
  for (const auto& t : r.tops) stats << pcs::apply::stats_line(t) << "\n";
  if (c.format == "json") emit(c, pcs::apply::to_json(r, false).dump(2) + "\n");
  else if (c.format == "text") emit(c, c.infeasible ? reports_text(r) : std::string());
  return 0;
}

int run_paths(const Config& c) {
  AppInputs in = load_app(c);
  auto r = apply_inputs(c, in, true);
  if (c.format == "json") {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& t : r.tops)
      out[t.top->qualified_name()] = {{"longest", t.paths.longest},
                                      {"paths", pcs::apply::paths_json(t.paths)},
                                      {"feasible_paths", pcs::apply::paths_json(t.feasible_paths)}};
    emit(c, out.dump(2) + "\n");
    return 0;
  }
  std::string out;
  for (const auto& t : r.tops) {
    out += t.top->qualified_name() + "\tlongest=" + std::to_string(t.paths.longest) + "\n";
    for (const auto& s : t.paths.sequences) {
      out += t.feasible_paths.sequences.count(s) ? "  " : "  x ";
      for (std::size_t i = 0; i < s.size(); ++i) out += (i ? " -> " : "") + s[i];
      out += "\n";
    }
  }
  emit(c, out);
  return 0;
}

int run_infeasible(const Config& c) {
  AppInputs in = load_app(c);
  auto r = apply_inputs(c, in, true);
  if (c.format == "json") {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& t : r.tops)
      for (const auto& rep : t.reports) {
        auto j = pcs::apply::report_json(t.graph, rep);
        j["top"] = t.top->qualified_name();
        out.push_back(j);
      }
    emit(c, out.dump(2) + "\n");
  } else {
    emit(c, reports_text(r));
  }
  return 0;
}

int run_dot(const Config& c) {
  if (c.inputs.size() == 1 && c.inputs[0].ends_with(".json")) {
    pcs::store::SummaryStore s;
    try {
      s = pcs::store::load_store(c.inputs[0]);
    } catch (const pcs::store::StoreError& e) {
      throw InputError(c.inputs[0] + ": " + e.what());
    }
    std::string out;
    for (const auto& [id, p] : s.summaries)
      if (c.apis.empty() || std::find(c.apis.begin(), c.apis.end(), id) != c.apis.end() ||
          std::any_of(c.apis.begin(), c.apis.end(), [&](const auto& a) { return id.rfind(a + "/", 0) == 0; }))
        out += pcs::dot::pcs_to_dot(p);
    emit(c, out);
    return 0;
  }
  auto program = parse_inputs(c.inputs);
  auto opt = summarize_options(c);
  std::string out;
  if (c.kind == "pcs") {
    pcs::pipeline::SummarizeResult r;
    try {
      r = pcs::pipeline::summarize(program, opt);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    for (const auto& [id, p] : r.store.summaries) out += pcs::dot::pcs_to_dot(p);
  } else if (c.kind == "icfg") {
    auto fa = pcs::pipeline::analyze_framework(program, opt);
    for (std::size_t i = 0; i < fa.apis.size(); ++i)
      if (pcs::pipeline::api_selected(*fa.apis[i], c.apis)) out += pcs::dot::icfg_to_dot(fa.marked[i]);
  } else {
    for (const auto& cls : program.classes())
      for (const auto& m : cls.methods) {
        if (!m.has_body || cls.builtin) continue;
        bool want = c.apis.empty() ? m.is_api
                                   : std::find(c.apis.begin(), c.apis.end(), m.qualified_name()) != c.apis.end() ||
                                         std::find(c.apis.begin(), c.apis.end(), m.name) != c.apis.end();
        if (want) out += pcs::dot::cfg_to_dot(pcs::graphs::build_cfg(m));
      }
  }
  emit(c, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predicate-callback summaries for event-driven frameworks"};
  app.require_subcommand(1);
  Config c;

  auto add_bounds = [&](CLI::App* sub) {
    sub->add_option("--api", c.apis, "Restrict to these API methods (name, Class.name or id)");
    sub->add_option("--max-chain", c.max_chain, "Maximum call-chain length in methods")->capture_default_str();
    sub->add_option("--max-callers", c.max_callers, "Callers explored per backward step")->capture_default_str();
    sub->add_option("--seed", c.seed, "Seed for caller sampling")->capture_default_str();
    sub->add_option("--templates", c.templates, "Template table file");
  };
  auto add_common = [&](CLI::App* sub, const char* inputs_help) {
    sub->add_option("inputs", c.inputs, inputs_help)->required();
    sub->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();
    sub->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "dot", "text"}))
        ->capture_default_str();
    sub->add_option("-o,--output", c.output, "Output path (stdout when omitted)");
  };

  auto* summarize = app.add_subcommand("summarize", "Summarize every API method of a framework");
  add_common(summarize, "Framework IR files");
  add_bounds(summarize);

  auto* apply = app.add_subcommand("apply", "Apply a summary store to app code");
  add_common(apply, "STORE then IR files (framework and app)");
  apply->add_flag("--infeasible", c.infeasible, "Report infeasible callback edges");
  apply->add_option("--bound", c.bound, "Maximum callbacks per enumerated path")->capture_default_str();

  auto* paths = app.add_subcommand("paths", "Enumerate callback sequences per top-level method");
  add_common(paths, "STORE then IR files (framework and app)");
  paths->add_option("--bound", c.bound, "Maximum callbacks per enumerated path")->capture_default_str();

  auto* infeasible = app.add_subcommand("infeasible", "Report infeasible callback edges");
  add_common(infeasible, "STORE then IR files (framework and app)");

  auto* dot = app.add_subcommand("dot", "Export CFG, ICFG or summary graphs as DOT");
  add_common(dot, "Framework IR files, or a summary store (.json)");
  add_bounds(dot);
  dot->add_option("--kind", c.kind, "Graph kind")->check(CLI::IsMember({"pcs", "icfg", "cfg"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*summarize) return run_summarize(c);
    if (*apply) return run_apply(c);
    if (*paths) return run_paths(c);
    if (*infeasible) return run_infeasible(c);
    if (*dot) return run_dot(c);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
