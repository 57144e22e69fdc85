#pragma once

// CSV and key=value plumbing for the command-line tool.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dirfdr/decision.hpp"
#include "dirfdr/errors.hpp"
#include "dirfdr/null_models.hpp"
#include "dirfdr/simulation.hpp"

namespace dirfdr::io {

// Shortest round-trip representation.
inline std::string format_number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

inline std::optional<std::uint64_t> parse_unsigned(std::string_view s) {
  s = trim(s);
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw InputError("unterminated quoted field");
  if (!cur.empty() && cur.back() == '\r') cur.pop_back();
  out.push_back(std::move(cur));
  return out;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line per row

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return j;
    return std::nullopt;
  }

  std::size_t require_column(std::string_view name) const {
    if (auto c = column(name)) return *c;
    throw InputError("missing required column '" + std::string(name) + "'");
  }
};

// Header row required; blank lines are skipped.
inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    for (auto& f : fields) f = std::string(trim(f));
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw InputError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw InputError("input has no header row");
  return t;
}

// ---------------------------------------------------------------------------
// Analysis input
// ---------------------------------------------------------------------------

struct AnalysisInput {
  std::vector<std::string> ids;
  ZSample sample;
};

// Columns: id, z (required); family = normal | nct, sigma, nu, alpha, beta
// (optional, blank means default). Every bad row is reported.
inline AnalysisInput read_analysis_input(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t c_id = t.require_column("id");
  const std::size_t c_z = t.require_column("z");
  const auto c_family = t.column("family");
  const auto c_sigma = t.column("sigma");
  const auto c_nu = t.column("nu");
  const auto c_alpha = t.column("alpha");
  const auto c_beta = t.column("beta");

  std::vector<std::string> ids;
  std::vector<double> z;
  std::vector<NullFamily> fams;
  std::vector<std::string> problems;
  std::set<std::string> seen;

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = "line " + std::to_string(t.line_numbers[r]) + ": ";
    auto cell = [&](std::optional<std::size_t> c) -> std::string_view {
      return c ? std::string_view(row[*c]) : std::string_view{};
    };
    auto number = [&](std::optional<std::size_t> c, const char* name) -> std::optional<double> {
      const auto s = cell(c);
      if (s.empty()) return std::nullopt;
      auto v = parse_double(s);
      if (!v) problems.push_back(where + "invalid " + name + " '" + std::string(s) + "'");
      return v;
    };
    const std::size_t before = problems.size();

    const std::string& id = row[c_id];
    if (id.empty()) problems.push_back(where + "empty id");
    else if (!seen.insert(id).second) problems.push_back(where + "duplicate id '" + id + "'");

    const auto zv = parse_double(row[c_z]);
    if (!zv) problems.push_back(where + "invalid z '" + row[c_z] + "'");
    else if (!std::isfinite(*zv)) problems.push_back(where + "z must be finite");
    else if (*zv == 0.0) problems.push_back(where + "z = 0 has no sign; remove or perturb the row");

    std::string family(cell(c_family));
    if (family.empty()) family = "normal";
    NullFamily fam = Normal{};
    if (family == "normal") {
      const auto sigma = number(c_sigma, "sigma");
      fam = Normal{sigma.value_or(1.0)};
    } else if (family == "nct") {
      const auto nu = number(c_nu, "nu");
      if (!nu) {
        if (cell(c_nu).empty()) problems.push_back(where + "family nct requires nu");
      } else {
        try {
          NoncentralT t_fam = NoncentralT::laubscher(*nu);
          if (auto a = number(c_alpha, "alpha")) t_fam.alpha = *a;
          if (auto b = number(c_beta, "beta")) t_fam.beta = *b;
          fam = t_fam;
        } catch (const InputError& e) {
          problems.push_back(where + e.what());
        }
      }
    } else {
      problems.push_back(where + "unknown family '" + family + "'");
    }
    if (problems.size() == before) {
      try {
        validate(fam);
      } catch (const InputError& e) {
        problems.push_back(where + e.what());
      }
    }
    if (problems.size() == before) {
      ids.push_back(id);
      z.push_back(*zv);
      fams.push_back(fam);
    }
  }
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "\n") + p;
    throw InputError(msg);
  }
  if (z.empty()) throw InputError("input has no data rows");
  return AnalysisInput{std::move(ids), ZSample(std::move(z), std::move(fams))};
}

// ---------------------------------------------------------------------------
// Decisions
// ---------------------------------------------------------------------------

inline void write_decisions(std::ostream& out, const AnalysisInput& input, const DecisionSet& d,
                            std::string_view method, double q) {
  const auto p = input.sample.pvalues();
  out << "id,z,p_value,rejected,sign,method,q\n";
  for (std::size_t i = 0; i < input.sample.size(); ++i) {
    const auto s = d.sign(i);
    out << csv_field(input.ids[i]) << ',' << format_number(input.sample.z(i)) << ',' << format_number(p[i]) << ','
        << (s ? 1 : 0) << ',' << (s ? (*s == Sign::Positive ? "+1" : "-1") : "") << ',' << method << ','
        << format_number(q) << '\n';
  }
}

struct DecisionsFile {
  std::vector<std::string> ids;
  DecisionSet decisions;  // indexed by row order
};

inline DecisionsFile read_decisions(std::istream& in) {
  const CsvTable t = read_csv(in);
  const std::size_t c_id = t.require_column("id");
  const std::size_t c_rej = t.require_column("rejected");
  const std::size_t c_sign = t.require_column("sign");
  DecisionsFile f;
  std::vector<Discovery> items;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = "line " + std::to_string(t.line_numbers[r]) + ": ";
    f.ids.push_back(row[c_id]);
    if (row[c_rej] == "1") {
      if (row[c_sign] == "+1" || row[c_sign] == "1") items.push_back({r, Sign::Positive});
      else if (row[c_sign] == "-1") items.push_back({r, Sign::Negative});
      else throw InputError(where + "rejected row without a sign");
    } else if (row[c_rej] != "0") {
      throw InputError(where + "rejected must be 0 or 1");
    } else if (!row[c_sign].empty()) {
      throw InputError(where + "sign given for a non-rejected row");
    }
  }
  f.decisions = DecisionSet(std::move(items));
  return f;
}

// ---------------------------------------------------------------------------
// Simulation output
// ---------------------------------------------------------------------------

inline void write_rep_csv(std::ostream& out, const SimResult& res) {
  out << "w,xi,v,method,rep,fdp_dir,tpp,n_rejected,error\n";
  for (const auto& r : res.reps) {
    out << format_number(r.cell.w) << ',' << format_number(r.cell.xi) << ',' << format_number(r.cell.v) << ','
        << method_name(r.method) << ',' << r.rep << ',';
    if (r.error.empty())
      out << format_number(r.eval.fdp_dir) << ',' << format_number(r.eval.tpp) << ',' << r.eval.n_rejected << ",\n";
    else
      out << "NA,NA,NA," << csv_field(r.error) << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const SimResult& res) {
  out << "w,xi,v,method,q,mean_fdr_dir,se_fdr_dir,mean_tpr,se_tpr,mean_n_rejected,n_ok,n_errors\n";
  for (const auto& s : res.summary) {
    out << format_number(s.cell.w) << ',' << format_number(s.cell.xi) << ',' << format_number(s.cell.v) << ','
        << method_name(s.method) << ',' << format_number(res.q) << ',' << format_number(s.mean_fdr_dir) << ','
        << format_number(s.se_fdr_dir) << ',' << format_number(s.mean_tpr) << ',' << format_number(s.se_tpr) << ','
        << format_number(s.mean_rejected) << ',' << s.n_ok << ',' << s.n_errors << '\n';
  }
}

// ---------------------------------------------------------------------------
// Flat key=value configuration
// ---------------------------------------------------------------------------

inline std::vector<double> parse_number_list(std::string_view s, const std::string& key) {
  std::vector<double> out;
  std::string item;
  std::istringstream is{std::string(s)};
  while (std::getline(is, item, ',')) {
    auto v = parse_double(item);
    if (!v) throw InputError("config key '" + key + "': invalid number '" + std::string(trim(item)) + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw InputError("config key '" + key + "': empty list");
  return out;
}

inline std::vector<Method> parse_method_list(std::string_view s) {
  std::vector<Method> out;
  std::string item;
  std::istringstream is{std::string(s)};
  while (std::getline(is, item, ',')) {
    const auto name = trim(item);
    if (!name.empty()) out.push_back(parse_method(name));
  }
  if (out.empty()) throw InputError("method list is empty");
  return out;
}

inline std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw InputError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key(trim(body.substr(0, eq)));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = std::string(trim(body.substr(eq + 1)));
  }
  return kv;
}

inline constexpr std::string_view kConfigKeys[] = {
    "m",       "q",        "reps",       "seed",           "w",          "xi",          "v",
    "methods", "lambda",   "B",          "lambda_grid",    "threads",    "refit_cadence", "zdirect_lambda",
    "ash_lambda0"};

// Overlays documented keys onto `cfg`; unknown keys are rejected by name.
inline void apply_config(SimConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (std::find(std::begin(kConfigKeys), std::end(kConfigKeys), key) == std::end(kConfigKeys))
      throw InputError("unknown config key '" + key + "'");
    auto real = [&] {
      auto v = parse_double(value);
      if (!v) throw InputError("config key '" + key + "': invalid number '" + value + "'");
      return *v;
    };
    auto count = [&] {
      auto v = parse_unsigned(value);
      if (!v) throw InputError("config key '" + key + "': expected a non-negative integer");
      return *v;
    };
    if (key == "m") cfg.m = count();
    else if (key == "q") cfg.q = real();
    else if (key == "reps") cfg.reps = count();
    else if (key == "seed") cfg.seed = count();
    else if (key == "w") cfg.w_values = parse_number_list(value, key);
    else if (key == "xi") cfg.xi_values = parse_number_list(value, key);
    else if (key == "v") cfg.v_values = parse_number_list(value, key);
    else if (key == "methods") cfg.methods = parse_method_list(value);
    else if (key == "lambda") cfg.options.storey_lambda = real();
    else if (key == "B") cfg.options.bootstraps = count();
    else if (key == "lambda_grid") cfg.options.lambda_grid = parse_number_list(value, key);
    else if (key == "threads") cfg.threads = count();
    else if (key == "refit_cadence") cfg.options.zdirect.refit_cadence = count();
    else if (key == "zdirect_lambda") cfg.options.zdirect.dirichlet = real();
    else if (key == "ash_lambda0") cfg.options.ash.null_penalty = real();
  }
}

}  // namespace dirfdr::io
