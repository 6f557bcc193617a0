#pragma once

// CSV readers and writers. Numbers are written in shortest round-trip form,
// so identical values always produce identical bytes and re-parse exactly.
//
//   samples     obs: y,t,x   iv: y,t,i (empty i = no instrument)   proxy: y,t,p
//               optional trailing y0,y1 carry potential outcomes
//   mc rows     scenario,s,method,metric,value,mc_se,runs,seed
//   failures    scenario,s,run,failure_kind,redraws
//   risk table  g,label,estimate,diff_sq,var_diff,var_g,raw_risk,mod_risk,cv_risk,selected
//   replicates  b,g,estimate

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tms/bootstrap.hpp"
#include "tms/error.hpp"
#include "tms/experiments.hpp"
#include "tms/format.hpp"
#include "tms/sample.hpp"
#include "tms/selection.hpp"

namespace tms {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      break;
    }
    cells.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

/// Header-indexed table of string cells.
class CsvTable {
 public:
  static CsvTable parse(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::InvalidInput, "missing CSV header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    t.header_ = split_csv_line(line);
    for (std::size_t c = 0; c < t.header_.size(); ++c) t.index_[t.header_[c]] = c;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      auto cells = split_csv_line(line);
      if (cells.size() != t.header_.size()) {
        throw Error(ErrorKind::InvalidInput,
                    "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(t.header_.size()));
      }
      t.rows_.push_back(std::move(cells));
    }
    return t;
  }

  bool has(const std::string& col) const { return index_.count(col) > 0; }
  std::size_t column(const std::string& col) const {
    auto it = index_.find(col);
    if (it == index_.end()) throw Error(ErrorKind::MissingColumn, "no column '" + col + "'");
    return it->second;
  }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  const std::vector<std::string>& header() const { return header_; }

 private:
  std::vector<std::string> header_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> rows_;
};

namespace detail {

inline double cell_double(const std::string& cell, std::size_t row, const char* col) {
  auto v = parse_double(cell);
  if (!v || !std::isfinite(*v)) {
    throw Error(ErrorKind::InvalidInput, "row " + std::to_string(row + 1) + " column " + col +
                                             ": not a finite number: '" + cell + "'");
  }
  return *v;
}

inline int cell_binary(const std::string& cell, std::size_t row, const char* col) {
  const double v = cell_double(cell, row, col);
  if (v != 0.0 && v != 1.0) {
    throw Error(ErrorKind::InvalidInput,
                "row " + std::to_string(row + 1) + " column " + col + " must be 0 or 1");
  }
  return static_cast<int>(v);
}

inline bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

inline ScenarioSample read_sample(std::istream& in, Scenario scenario) {
  const auto table = CsvTable::parse(in);
  const auto& rows = table.rows();
  const std::size_t cy = table.column("y"), ct = table.column("t");
  switch (scenario) {
    case Scenario::Observational: {
      const std::size_t cx = table.column("x");
      std::vector<ObsRecord> rec;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        rec.push_back({detail::cell_double(rows[r][cy], r, "y"),
                       detail::cell_binary(rows[r][ct], r, "t"),
                       detail::cell_binary(rows[r][cx], r, "x")});
      }
      return ObsSample(std::move(rec));
    }
    case Scenario::IvFusion: {
      const std::size_t ci = table.column("i");
      std::vector<IvRecord> rec;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        IvRecord x{detail::cell_double(rows[r][cy], r, "y"),
                   detail::cell_double(rows[r][ct], r, "t"), std::nullopt};
        if (!detail::blank(rows[r][ci])) x.i = detail::cell_double(rows[r][ci], r, "i");
        rec.push_back(x);
      }
      return IvSample(std::move(rec));
    }
    case Scenario::Proxy: {
      const std::size_t cp = table.column("p");
      std::vector<ProxyRecord> rec;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        rec.push_back({detail::cell_double(rows[r][cy], r, "y"),
                       detail::cell_binary(rows[r][ct], r, "t"),
                       detail::cell_binary(rows[r][cp], r, "p")});
      }
      return ProxySample(std::move(rec));
    }
  }
  throw Error(ErrorKind::InvalidInput, "unknown scenario");
}

inline ScenarioSample read_sample_file(const std::string& path, Scenario scenario) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_sample(in, scenario);
}

/// Writes a sample; `potential` (if nonempty) adds y0,y1 columns.
inline void write_sample(std::ostream& out, const ScenarioSample& sample,
                         const std::vector<std::pair<double, double>>& potential = {}) {
  const bool po = !potential.empty();
  auto tail = [&](std::size_t k) {
    if (po) out << ',' << format_double(potential[k].first) << ',' << format_double(potential[k].second);
    out << '\n';
  };
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::same_as<S, ObsSample>) out << "y,t,x";
        if constexpr (std::same_as<S, IvSample>) out << "y,t,i";
        if constexpr (std::same_as<S, ProxySample>) out << "y,t,p";
        out << (po ? ",y0,y1\n" : "\n");
        for (std::size_t k = 0; k < s.size(); ++k) {
          const auto& r = s[k];
          out << format_double(r.y) << ',';
          if constexpr (std::same_as<S, ObsSample>) out << r.t << ',' << r.x;
          if constexpr (std::same_as<S, IvSample>) {
            out << format_double(r.t) << ',';
            if (r.i) out << format_double(*r.i);
          }
          if constexpr (std::same_as<S, ProxySample>) out << r.t << ',' << r.p;
          tail(k);
        }
      },
      sample);
}

inline void write_rows(std::ostream& out, const std::vector<McRow>& rows) {
  out << "scenario,s,method,metric,value,mc_se,runs,seed\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << format_double(r.s) << ',' << r.method << ','
        << metric_name(r.metric) << ',' << format_double(r.value) << ',' << format_double(r.mc_se)
        << ',' << r.runs << ',' << r.seed << '\n';
  }
}

namespace detail {

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

}  // namespace detail

inline void write_rows(const std::vector<McRow>& rows, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { write_rows(o, rows); });
}

inline std::optional<Metric> parse_metric(std::string_view s) {
  for (Metric m : {Metric::Mse, Metric::Coverage, Metric::BiasOfCriterion, Metric::VarOfCriterion,
                   Metric::SelectProb}) {
    if (metric_name(m) == s) return m;
  }
  return std::nullopt;
}

inline std::vector<McRow> read_rows(std::istream& in) {
  const auto table = CsvTable::parse(in);
  const std::size_t cs = table.column("scenario"), cx = table.column("s"),
                    cm = table.column("method"), cmet = table.column("metric"),
                    cv = table.column("value"), cse = table.column("mc_se"),
                    cr = table.column("runs"), cseed = table.column("seed");
  std::vector<McRow> rows;
  const auto& raw = table.rows();
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto metric = parse_metric(raw[r][cmet]);
    if (!metric) throw Error(ErrorKind::InvalidInput, "unknown metric '" + raw[r][cmet] + "'");
    rows.push_back({raw[r][cs], detail::cell_double(raw[r][cx], r, "s"), raw[r][cm], *metric,
                    detail::cell_double(raw[r][cv], r, "value"),
                    detail::cell_double(raw[r][cse], r, "mc_se"),
                    static_cast<std::size_t>(detail::cell_double(raw[r][cr], r, "runs")),
                    std::stoull(raw[r][cseed])});
  }
  return rows;
}

inline void write_failures(std::ostream& out, const std::vector<FailureRow>& rows) {
  out << "scenario,s,run,failure_kind,redraws\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << format_double(r.s) << ',' << r.run << ',' << r.failure_kind << ','
        << r.redraws << '\n';
  }
}

inline void write_failures(const std::vector<FailureRow>& rows, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { write_failures(o, rows); });
}

inline void write_risk_table(std::ostream& out, const RiskTable& table,
                             std::optional<std::size_t> selected) {
  out << "g,label,estimate,diff_sq,var_diff,var_g,raw_risk,mod_risk,cv_risk,selected\n";
  for (std::size_t g = 0; g < table.rows.size(); ++g) {
    const auto& r = table.rows[g];
    out << g << ',' << r.label << ',' << format_double(r.estimate) << ','
        << format_double(r.diff_sq) << ',' << format_double(r.var_diff) << ','
        << format_double(r.var_g) << ',' << format_double(r.raw_risk) << ','
        << format_double(r.mod_risk) << ',';
    if (r.cv_risk) out << format_double(*r.cv_risk);
    out << ',' << (selected && *selected == g ? 1 : 0) << '\n';
  }
}

inline void write_replicates(std::ostream& out, const ReplicateMatrix& m) {
  out << "b,g,estimate\n";
  for (std::size_t b = 0; b < m.replicates; ++b) {
    for (std::size_t g = 0; g < m.candidates; ++g) {
      out << b << ',' << g << ',' << format_double(m.at(b, g)) << '\n';
    }
  }
}

}  // namespace tms
