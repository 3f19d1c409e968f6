#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcs/ir_parser.hpp"

namespace fixtures {

inline std::string path(const std::string& name) { return std::string(PCS_FIXTURE_DIR) + "/" + name; }

inline std::string read(const std::string& name) {
  std::ifstream in(path(name), std::ios::binary);
  if (!in) throw std::runtime_error("cannot read fixture " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline pcs::ir::Program load(const std::vector<std::string>& names) {
  std::vector<pcs::ir::SourceFile> files;
  for (const auto& n : names) files.push_back({n, read(n)});
  auto r = pcs::ir::parse_sources(files);
  if (!r.ok()) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += d.str() + "\n";
    throw std::runtime_error(msg);
  }
  return std::move(*r.program);
}

inline pcs::ir::Program parse(const std::string& text) {
  auto r = pcs::ir::parse_program(text);
  if (!r.ok()) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += d.str() + "\n";
    throw std::runtime_error(msg);
  }
  return std::move(*r.program);
}

}  // namespace fixtures
