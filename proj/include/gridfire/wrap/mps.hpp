#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gridfire/core/error.hpp"
#include "gridfire/core/text.hpp"
#include "gridfire/wrap/program.hpp"

namespace gridfire::wrap {

// Fixed-format MPS. Columns are named C0000001.., rows R0000001.., the
// objective row COST. The objective constant is written as minus the RHS of
// COST, the usual convention. Numbers are fitted to the 12-character field.

namespace detail {

inline std::string mps_number(double v) {
  char buf[40];
  for (int prec = 12; prec >= 1; --prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::string(buf).size() <= 12) return buf;
  }
  throw InvalidArgument("value does not fit an MPS field: " + text::shortest(v));
}

// Names hold 8 characters, so at most 9,999,999 rows or columns.
inline std::string mps_name(char prefix, std::size_t i) {
  if (i >= 9999999) throw InvalidArgument("too many rows or columns for fixed MPS names");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%07zu", prefix, i + 1);
  return buf;
}

inline std::string mps_line(const char* f1, const std::string& f2, const std::string& f3, const std::string& f4,
                            const std::string& f5 = {}, const std::string& f6 = {}) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " %-2s %-8s  %-8s  %-12s   %-8s  %-12s", f1, f2.c_str(), f3.c_str(), f4.c_str(),
                f5.c_str(), f6.c_str());
  std::string s = buf;
  s.erase(s.find_last_not_of(' ') + 1);
  return s;
}

}  // namespace detail

inline void write_mps(const MixedIntegerProgram& p, std::ostream& out, const std::string& name = "GRIDFIRE") {
  using namespace detail;
  p.check();
  if (p.num_vars() >= 10000000 || p.num_rows() >= 10000000) throw InvalidArgument("program too large for 8-character names");
  // Column-major view of the rows.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(p.num_vars());
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    std::map<std::size_t, double> merged;
    for (const auto& [j, a] : p.rows[i].terms) merged[j] += a;
    for (const auto& [j, a] : merged)
      if (a != 0.0) cols[j].push_back({i, a});
  }
  out << "NAME          " << name << "\n";
  out << "ROWS\n";
  out << " N  COST\n";
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    const char* t = p.rows[i].sense == Sense::LessEqual ? "L" : p.rows[i].sense == Sense::GreaterEqual ? "G" : "E";
    out << " " << t << "  " << mps_name('R', i) << "\n";
  }
  out << "COLUMNS\n";
  bool in_int = false;
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    if (p.is_integer(j) != in_int) {
      in_int = p.is_integer(j);
      out << mps_line("", "MARKER", "'MARKER'", "", in_int ? "'INTORG'" : "'INTEND'") << "\n";
    }
    std::vector<std::pair<std::string, double>> entries;
    if (p.cost[j] != 0.0 || cols[j].empty()) entries.push_back({"COST", p.cost[j]});
    for (const auto& [i, a] : cols[j]) entries.push_back({mps_name('R', i), a});
    const std::string cn = mps_name('C', j);
    for (std::size_t k = 0; k < entries.size(); k += 2) {
      if (k + 1 < entries.size())
        out << mps_line("", cn, entries[k].first, mps_number(entries[k].second), entries[k + 1].first,
                        mps_number(entries[k + 1].second))
            << "\n";
      else
        out << mps_line("", cn, entries[k].first, mps_number(entries[k].second)) << "\n";
    }
  }
  if (in_int) out << mps_line("", "MARKER", "'MARKER'", "", "'INTEND'") << "\n";
  out << "RHS\n";
  if (p.objective_offset != 0.0) out << mps_line("", "RHS", "COST", mps_number(-p.objective_offset)) << "\n";
  for (std::size_t i = 0; i < p.num_rows(); ++i)
    if (p.rows[i].rhs != 0.0) out << mps_line("", "RHS", mps_name('R', i), mps_number(p.rows[i].rhs)) << "\n";
  out << "BOUNDS\n";
  for (std::size_t j = 0; j < p.num_vars(); ++j) {
    const std::string cn = mps_name('C', j);
    const double lo = p.lower[j], hi = p.upper[j];
    if (lo == hi) {
      out << mps_line("FX", "BND", cn, mps_number(lo)) << "\n";
      continue;
    }
    if (lo == -kInf && hi == kInf) {
      out << mps_line("FR", "BND", cn, "") << "\n";
      continue;
    }
    if (lo == -kInf) out << mps_line("MI", "BND", cn, "") << "\n";
    else if (lo != 0.0 || p.is_integer(j)) out << mps_line("LO", "BND", cn, mps_number(lo)) << "\n";
    if (hi != kInf) out << mps_line("UP", "BND", cn, mps_number(hi)) << "\n";
    else if (p.is_integer(j)) out << mps_line("PL", "BND", cn, "") << "\n";
  }
  out << "ENDATA\n";
}

inline void save_mps(const MixedIntegerProgram& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_mps(p, out);
}

inline MixedIntegerProgram read_mps(std::istream& in) {
  MixedIntegerProgram p;
  std::map<std::string, std::size_t> row_index, col_index;
  std::string objective_row;
  std::string section, line;
  std::size_t lineno = 0;
  bool in_int = false;
  auto column = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it != col_index.end()) return it->second;
    const std::size_t j = in_int ? p.add_int_var(0.0, kInf, 0.0, name) : p.add_var(0.0, kInf, 0.0, name);
    col_index[name] = j;
    return j;
  };
  auto value = [&](const std::string& s) { return text::parse_double(s, lineno); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ss(line);
    std::vector<std::string> f;
    for (std::string tok; ss >> tok;) f.push_back(tok);
    if (f.empty()) continue;
    if (line[0] != ' ') {
      section = f[0];
      if (section == "ENDATA") break;
      if (section == "RANGES") throw ParseError("RANGES section is not supported", lineno);
      if (section != "NAME" && section != "ROWS" && section != "COLUMNS" && section != "RHS" && section != "BOUNDS")
        throw ParseError("unknown MPS section '" + section + "'", lineno);
      continue;
    }
    if (section == "ROWS") {
      if (f.size() != 2) throw ParseError("malformed ROWS entry", lineno);
      if (f[0] == "N") {
        if (objective_row.empty()) objective_row = f[1];
        continue;
      }
      const Sense s = f[0] == "L" ? Sense::LessEqual : f[0] == "G" ? Sense::GreaterEqual : Sense::Equal;
      if (f[0] != "L" && f[0] != "G" && f[0] != "E") throw ParseError("unknown row type '" + f[0] + "'", lineno);
      row_index[f[1]] = p.add_row({}, s, 0.0, f[1]);
    } else if (section == "COLUMNS") {
      if (f.size() >= 3 && f[1] == "'MARKER'") {
        if (f.back() == "'INTORG'") in_int = true;
        else if (f.back() == "'INTEND'") in_int = false;
        else throw ParseError("unknown marker", lineno);
        continue;
      }
      if (f.size() != 3 && f.size() != 5) throw ParseError("malformed COLUMNS entry", lineno);
      const std::size_t j = column(f[0]);
      for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
        const double a = value(f[k + 1]);
        if (f[k] == objective_row) {
          p.cost[j] += a;
        } else {
          auto it = row_index.find(f[k]);
          if (it == row_index.end()) throw ParseError("unknown row '" + f[k] + "'", lineno);
          p.rows[it->second].terms.push_back({j, a});
        }
      }
    } else if (section == "RHS") {
      if (f.size() != 3 && f.size() != 5) throw ParseError("malformed RHS entry", lineno);
      for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
        const double v = value(f[k + 1]);
        if (f[k] == objective_row) {
          p.objective_offset = -v;
        } else {
          auto it = row_index.find(f[k]);
          if (it == row_index.end()) throw ParseError("unknown row '" + f[k] + "'", lineno);
          p.rows[it->second].rhs = v;
        }
      }
    } else if (section == "BOUNDS") {
      if (f.size() < 3) throw ParseError("malformed BOUNDS entry", lineno);
      auto it = col_index.find(f[2]);
      if (it == col_index.end()) throw ParseError("unknown column '" + f[2] + "'", lineno);
      const std::size_t j = it->second;
      const std::string& t = f[0];
      const bool needs_value = t == "UP" || t == "LO" || t == "FX" || t == "LI" || t == "UI";
      if (needs_value && f.size() != 4) throw ParseError("bound needs a value", lineno);
      if (t == "UP" || t == "UI") p.upper[j] = value(f[3]);
      else if (t == "LO" || t == "LI") p.lower[j] = value(f[3]);
      else if (t == "FX") p.lower[j] = p.upper[j] = value(f[3]);
      else if (t == "FR") p.lower[j] = -kInf, p.upper[j] = kInf;
      else if (t == "MI") p.lower[j] = -kInf;
      else if (t == "PL") p.upper[j] = kInf;
      else if (t == "BV") p.lower[j] = 0.0, p.upper[j] = 1.0, p.integer[j] = 1;
      else throw ParseError("unknown bound type '" + t + "'", lineno);
      if (t == "LI" || t == "UI") p.integer[j] = 1;
    } else if (section != "NAME") {
      throw ParseError("data outside a section", lineno);
    }
  }
  if (objective_row.empty()) throw ParseError("MPS file has no objective row");
  return p;
}

inline MixedIntegerProgram load_mps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_mps(in);
}

}  // namespace gridfire::wrap
