#pragma once

// On-disk formats.
//
// Triple file (".triples"), line oriented UTF-8 text:
//   line 1   JSON header object, one line:
//              {"format":"notf-triples","version":1,"dims":[N1,N2,N3],
//               "signed":false,"labels":[[...],[...],[...]]}
//            "labels" is optional; an empty list leaves that mode unlabeled.
//            "signed" is optional (default false) and permits negative values.
//   line 2+  "i j k value", 0-based indices, single spaces. Blank lines are
//            ignored. Unlisted entries are zero.
// The writer emits nonzero entries in storage order (i fastest, then j, k)
// with the shortest decimal that round-trips the double.
//
// Factor file (".factors"):
//   notf-factors 1
//   A <rows> <cols>
//   <rows lines of cols space-separated values>
//   B <rows> <cols>
//   ...
//   C <rows> <cols>
//   ...

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "notf/eval.hpp"
#include "notf/solver.hpp"
#include "notf/synth.hpp"
#include "notf/tensor.hpp"

namespace notf {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  while (p < line.size()) {
    while (p < line.size() && (line[p] == ' ' || line[p] == '\t' || line[p] == '\r')) ++p;
    std::size_t q = p;
    while (q < line.size() && line[q] != ' ' && line[q] != '\t' && line[q] != '\r') ++q;
    if (q > p) out.push_back(line.substr(p, q - p));
    p = q;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseError::Kind::Io, 0, "cannot open " + path.string());
  return in;
}

inline std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(ParseError::Kind::Io, 0, "cannot write " + path.string());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Triple files

struct TripleData {
  Tensor3 tensor;
  std::optional<ModeLabels> labels;
  bool is_signed = false;
};

inline std::optional<ModeLabels> labels_from_json(const json& j) {
  if (!j.contains("labels") || j["labels"].is_null()) return std::nullopt;
  const json& l = j["labels"];
  if (!l.is_array() || l.size() != 3) throw ParseError(ParseError::Kind::Malformed, 1, "labels must be three lists");
  ModeLabels out;
  for (std::size_t d = 0; d < 3; ++d) out[d] = l[d].get<std::vector<std::string>>();
  return out;
}

inline TripleData read_triples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(ParseError::Kind::Malformed, 1, "missing header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(ParseError::Kind::Malformed, 1, std::string("header is not JSON: ") + e.what());
  }
  TripleData out;
  Dims dims{};
  try {
    if (header.value("format", "") != "notf-triples") throw ParseError(ParseError::Kind::Malformed, 1, "not a notf-triples file");
    const auto d = header.at("dims").get<std::vector<std::size_t>>();
    if (d.size() != 3 || d[0] == 0 || d[1] == 0 || d[2] == 0) {
      throw ParseError(ParseError::Kind::Malformed, 1, "dims must be three positive integers");
    }
    dims = {d[0], d[1], d[2]};
    out.is_signed = header.value("signed", false);
    out.labels = labels_from_json(header);
  } catch (const json::exception& e) {
    throw ParseError(ParseError::Kind::Malformed, 1, std::string("bad header: ") + e.what());
  }
  if (out.labels) {
    for (std::size_t d = 0; d < 3; ++d) {
      const auto& l = (*out.labels)[d];
      if (!l.empty() && l.size() != dims[d]) {
        throw ParseError(ParseError::Kind::Malformed, 1,
                         "mode " + std::to_string(d + 1) + " has " + std::to_string(l.size()) + " labels, expected " +
                             std::to_string(dims[d]));
      }
    }
  }

  out.tensor = Tensor3(dims);
  std::vector<char> seen(out.tensor.size(), 0);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    std::size_t idx[3];
    double value = 0.0;
    if (tok.size() != 4 || !detail::parse_number(tok[0], idx[0]) || !detail::parse_number(tok[1], idx[1]) ||
        !detail::parse_number(tok[2], idx[2]) || !detail::parse_number(tok[3], value) || !std::isfinite(value)) {
      throw ParseError(ParseError::Kind::Malformed, lineno, "expected 'i j k value', got '" + line + "'");
    }
    for (std::size_t d = 0; d < 3; ++d) {
      if (idx[d] >= dims[d]) {
        throw ParseError(ParseError::Kind::OutOfRange, lineno,
                         "mode " + std::to_string(d + 1) + " index " + std::to_string(idx[d]) + " outside [0, " +
                             std::to_string(dims[d]) + ")");
      }
    }
    if (value < 0.0 && !out.is_signed) {
      throw ParseError(ParseError::Kind::Negative, lineno, "negative value " + format_double(value));
    }
    const std::size_t off = out.tensor.offset(idx[0], idx[1], idx[2]);
    if (seen[off]) {
      throw ParseError(ParseError::Kind::Duplicate, lineno,
                       "duplicate entry (" + std::to_string(idx[0]) + ", " + std::to_string(idx[1]) + ", " +
                           std::to_string(idx[2]) + ")");
    }
    seen[off] = 1;
    out.tensor[off] = value;
  }
  return out;
}

inline TripleData load_triples(const fs::path& path) {
  auto in = detail::open_in(path);
  return read_triples(in);
}

inline void write_triples(std::ostream& out, const Tensor3& t, const std::optional<ModeLabels>& labels = std::nullopt) {
  bool is_signed = false;
  for (double v : t.values()) is_signed |= v < 0.0;
  json header = {{"format", "notf-triples"},
                 {"version", 1},
                 {"dims", {t.dims()[0], t.dims()[1], t.dims()[2]}},
                 {"signed", is_signed}};
  if (labels) header["labels"] = {(*labels)[0], (*labels)[1], (*labels)[2]};
  out << header.dump() << '\n';
  const auto [n1, n2, n3] = t.dims();
  for (std::size_t k = 0; k < n3; ++k)
    for (std::size_t j = 0; j < n2; ++j)
      for (std::size_t i = 0; i < n1; ++i) {
        const double v = t(i, j, k);
        if (v != 0.0) out << i << ' ' << j << ' ' << k << ' ' << format_double(v) << '\n';
      }
}

inline void save_triples(const fs::path& path, const Tensor3& t, const std::optional<ModeLabels>& labels = std::nullopt) {
  auto out = detail::open_out(path);
  write_triples(out, t, labels);
}

// Labels from either a triple file (header line) or a standalone JSON object
// with a "labels" key.
inline std::optional<ModeLabels> load_labels(const fs::path& path) {
  auto in = detail::open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    j = json::parse(text.substr(0, text.find('\n')), nullptr, false);
    if (j.is_discarded()) throw ParseError(ParseError::Kind::Malformed, 1, "no JSON labels in " + path.string());
  }
  try {
    return labels_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(ParseError::Kind::Malformed, 1, std::string("bad labels: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Factor files

inline void write_factors(std::ostream& out, const FactorTriple& f) {
  out << "notf-factors 1\n";
  const char names[3] = {'A', 'B', 'C'};
  for (int d = 1; d <= 3; ++d) {
    const Matrix& m = f.factor(d);
    out << names[d - 1] << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index r = 0; r < m.cols(); ++r) {
        if (r) out << ' ';
        out << format_double(m(i, r));
      }
      out << '\n';
    }
  }
}

inline void save_factors(const fs::path& path, const FactorTriple& f) {
  auto out = detail::open_out(path);
  write_factors(out, f);
}

inline FactorTriple read_factors(std::istream& in) {
  using Kind = ParseError::Kind;
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> std::string& {
    do {
      if (!std::getline(in, line)) throw ParseError(Kind::Malformed, lineno + 1, "unexpected end of factor file");
      ++lineno;
    } while (detail::split_ws(line).empty());
    return line;
  };

  next_line();
  if (auto tok = detail::split_ws(line); tok.size() != 2 || tok[0] != "notf-factors" || tok[1] != "1") {
    throw ParseError(Kind::Malformed, lineno, "expected 'notf-factors 1'");
  }
  Matrix blocks[3];
  const char names[3] = {'A', 'B', 'C'};
  for (int b = 0; b < 3; ++b) {
    next_line();
    const auto tok = detail::split_ws(line);
    Eigen::Index rows = 0, cols = 0;
    if (tok.size() != 3 || tok[0] != std::string_view(&names[b], 1) || !detail::parse_number(tok[1], rows) ||
        !detail::parse_number(tok[2], cols) || rows <= 0 || cols < 0) {
      throw ParseError(Kind::Malformed, lineno, std::string("expected '") + names[b] + " <rows> <cols>'");
    }
    if (b > 0 && cols != blocks[0].cols()) {
      throw ParseError(Kind::RankMismatch, lineno,
                       std::string("block ") + names[b] + " has " + std::to_string(cols) + " columns, A has " +
                           std::to_string(blocks[0].cols()));
    }
    blocks[b].resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      next_line();
      const auto vals = detail::split_ws(line);
      if (static_cast<Eigen::Index>(vals.size()) != cols) {
        throw ParseError(Kind::RankMismatch, lineno,
                         "row has " + std::to_string(vals.size()) + " values, expected " + std::to_string(cols));
      }
      for (Eigen::Index r = 0; r < cols; ++r) {
        double v = 0.0;
        if (!detail::parse_number(vals[static_cast<std::size_t>(r)], v)) {
          throw ParseError(Kind::Malformed, lineno, "bad number '" + std::string(vals[static_cast<std::size_t>(r)]) + "'");
        }
        blocks[b](i, r) = v;
      }
    }
  }
  return {std::move(blocks[0]), std::move(blocks[1]), std::move(blocks[2])};
}

inline FactorTriple load_factors(const fs::path& path) {
  auto in = detail::open_in(path);
  return read_factors(in);
}

// ---------------------------------------------------------------------------
// JSON / CSV records

inline json to_json(const SynthSpec& s) {
  return {{"dims", {s.dims[0], s.dims[1], s.dims[2]}},
          {"true_rank", s.true_rank},
          {"sparsity", {s.sparsity[0], s.sparsity[1], s.sparsity[2]}},
          {"noise_ratio", s.noise_ratio},
          {"seed", s.seed}};
}

inline SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec s;
  const auto d = j.at("dims").get<std::vector<std::size_t>>();
  const auto sp = j.at("sparsity").get<std::vector<double>>();
  if (d.size() != 3 || sp.size() != 3) throw ParseError(ParseError::Kind::Malformed, 0, "spec dims/sparsity need 3 entries");
  s.dims = {d[0], d[1], d[2]};
  s.sparsity = {sp[0], sp[1], sp[2]};
  s.true_rank = j.at("true_rank").get<Eigen::Index>();
  s.noise_ratio = j.at("noise_ratio").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

inline json to_json(const SolverConfig& c) {
  return {{"rank", c.rank},
          {"tau", c.tau},
          {"eps", c.eps},
          {"max_outer_iters", c.max_outer_iters},
          {"max_inner_iters", c.max_inner_iters},
          {"variant", std::string(to_string(c.variant))},
          {"rcond", c.rcond},
          {"init",
           {{"max_iters", c.init.max_iters}, {"rel_change_tol", c.init.rel_change_tol}, {"seed", c.init.seed}}}};
}

inline json to_json(const Confusion& c) { return {{"fp", c.fp}, {"fn", c.fn}}; }

inline json to_json(const EvalReport& r) {
  json j;
  j["variant"] = std::string(to_string(r.variant));
  j["rank"] = r.rank;
  j["noise_ratio"] = r.noise_ratio ? json(*r.noise_ratio) : json(nullptr);
  j["outer_iterations"] = r.outer_iterations;
  j["converged"] = r.converged;
  j["false_positives_vs_truth"] = r.vs_truth ? json(r.vs_truth->fp) : json(nullptr);
  j["false_negatives_vs_truth"] = r.vs_truth ? json(r.vs_truth->fn) : json(nullptr);
  j["false_positives_vs_observation"] = r.vs_observation.fp;
  j["false_negatives_vs_observation"] = r.vs_observation.fn;
  j["mse_vs_truth"] = r.mse_vs_truth ? json(*r.mse_vs_truth) : json(nullptr);
  j["mse_vs_observation"] = r.mse_vs_observation;
  return j;
}

inline const char* kEvalCsvHeader =
    "variant,rank,noise_ratio,outer_iterations,converged,fp_truth,fn_truth,fp_observation,fn_observation,"
    "mse_truth,mse_observation";

inline std::string to_csv_row(const EvalReport& r) {
  std::ostringstream s;
  s << to_string(r.variant) << ',' << r.rank << ',' << (r.noise_ratio ? format_double(*r.noise_ratio) : "") << ','
    << r.outer_iterations << ',' << (r.converged ? 1 : 0) << ',' << (r.vs_truth ? std::to_string(r.vs_truth->fp) : "")
    << ',' << (r.vs_truth ? std::to_string(r.vs_truth->fn) : "") << ',' << r.vs_observation.fp << ','
    << r.vs_observation.fn << ',' << (r.mse_vs_truth ? format_double(*r.mse_vs_truth) : "") << ','
    << format_double(r.mse_vs_observation);
  return s.str();
}

inline void write_trace_csv(std::ostream& out, const SolverTrace& t) {
  out << "iteration,res1,res2,inner_sweeps,objective,seconds\n";
  for (const auto& r : t.records) {
    out << r.iteration << ',' << format_double(r.res1) << ',' << format_double(r.res2) << ',' << r.inner_res1.size()
        << ',' << format_double(r.objective) << ',' << format_double(r.seconds) << '\n';
  }
}

inline void write_json(const fs::path& path, const json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

inline json read_json(const fs::path& path) {
  auto in = detail::open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(ParseError::Kind::Malformed, 0, path.string() + ": " + e.what());
  }
}

}  // namespace notf
