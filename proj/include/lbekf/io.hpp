#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lbekf/error.hpp"
#include "lbekf/graph.hpp"
#include "lbekf/sim.hpp"

namespace lbekf::io {

// 17 significant digits.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::invalid_argument, "cannot open for writing: " + path);
  return out;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, const std::string& where) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(Errc::parse_error, where + ": cannot parse '" + std::string(s) + "' as a number");
  return v;
}

// Reads a CSV, checks the header against one of the accepted forms and
// returns the data rows (blank lines skipped).
inline std::vector<std::vector<std::string_view>> read_rows(const std::string& path, std::string& storage,
                                                            const std::vector<std::vector<std::string>>& headers,
                                                            std::size_t& matched) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::parse_error, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  storage = ss.str();
  std::vector<std::vector<std::string_view>> rows;
  std::string_view text = storage;
  bool have_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    auto fields = split(line);
    if (!have_header) {
      matched = headers.size();
      for (std::size_t h = 0; h < headers.size(); ++h)
        if (std::equal(fields.begin(), fields.end(), headers[h].begin(), headers[h].end())) matched = h;
      if (matched == headers.size()) throw Error(Errc::parse_error, path + ": unexpected header '" + std::string(line) + "'");
      have_header = true;
      continue;
    }
    if (fields.size() != headers[matched].size())
      throw Error(Errc::parse_error, path + ":" + std::to_string(line_no) + ": expected " +
                                         std::to_string(headers[matched].size()) + " fields");
    rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(Errc::parse_error, path + ": empty file");
  return rows;
}

}  // namespace detail

// Position file: header id,x,y[,z]; ids must be 0..n-1 (any row order).
inline Realization read_positions(const std::string& path, double radius) {
  std::string storage;
  std::size_t which = 0;
  const auto rows = detail::read_rows(path, storage, {{"id", "x"}, {"id", "x", "y"}, {"id", "x", "y", "z"}}, which);
  const std::size_t d = which + 1;
  const std::size_t n = rows.size();
  std::vector<double> coords(n * d);
  std::vector<bool> seen(n, false);
  for (const auto& r : rows) {
    const auto id = detail::parse_number<std::size_t>(r[0], path);
    if (id >= n || seen[id]) throw Error(Errc::parse_error, path + ": ids must be a permutation of 0.." + std::to_string(n - 1));
    seen[id] = true;
    for (std::size_t c = 0; c < d; ++c) coords[id * d + c] = detail::parse_number<double>(r[c + 1], path);
  }
  if (n == 0) throw Error(Errc::parse_error, path + ": no positions");
  try {
    return Realization(d, std::move(coords), radius);
  } catch (const Error& e) {
    throw Error(Errc::parse_error, path + ": " + e.what());
  }
}

inline void write_positions(const std::string& path, const Realization& x) {
  auto out = open_out(path);
  static const char* names[] = {"x", "y", "z"};
  out << "id";
  for (std::size_t c = 0; c < x.dim(); ++c) out << ',' << names[c];
  out << '\n';
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << i;
    for (double v : x.position(i)) out << ',' << fmt(v);
    out << '\n';
  }
}

inline void write_edges(const std::string& path, const WsnGraph& g) {
  auto out = open_out(path);
  out << "i,j\n";
  for (auto [i, j] : g.edges()) out << i << ',' << j << '\n';
}

inline WsnGraph read_edges(const std::string& path, std::size_t n_vertices) {
  std::string storage;
  std::size_t which = 0;
  std::vector<Edge> edges;
  for (const auto& r : detail::read_rows(path, storage, {{"i", "j"}}, which))
    edges.emplace_back(detail::parse_number<std::size_t>(r[0], path), detail::parse_number<std::size_t>(r[1], path));
  return WsnGraph(n_vertices, std::move(edges));
}

inline void write_permutation(const std::string& path, const Permutation& p) {
  auto out = open_out(path);
  out << "old_id,new_id\n";
  for (std::size_t i = 0; i < p.map().size(); ++i) out << i << ',' << p[i] << '\n';
}

inline Permutation read_permutation(const std::string& path) {
  std::string storage;
  std::size_t which = 0;
  const auto rows = detail::read_rows(path, storage, {{"old_id", "new_id"}}, which);
  std::vector<std::size_t> map(rows.size(), rows.size());
  for (const auto& r : rows) {
    const auto old_id = detail::parse_number<std::size_t>(r[0], path);
    if (old_id >= map.size()) throw Error(Errc::parse_error, path + ": old_id out of range");
    map[old_id] = detail::parse_number<std::size_t>(r[1], path);
  }
  return Permutation(std::move(map));
}

inline void write_fig2(const std::string& path, const std::vector<Fig2Row>& rows) {
  auto out = open_out(path);
  out << "input_bw,L,trial,error\n";
  for (const auto& r : rows) out << r.input_bw << ',' << r.band << ',' << r.trial << ',' << fmt(r.error) << '\n';
}

// One row per (algorithm, trial, timestep, agent); diverged trials keep the
// rows recorded before divergence.
inline void write_mse(const std::string& path, const LocalizationResult& res) {
  auto out = open_out(path);
  out << "algorithm,trial,timestep,agent,mse\n";
  for (std::size_t a = 0; a < res.algorithms.size(); ++a)
    for (const auto& rec : res.records[a]) {
      const std::size_t last = rec.diverged ? rec.diverged_at : rec.n_timesteps();
      for (std::size_t k = 0; k < last; ++k)
        for (std::size_t i = 0; i < rec.n_agents; ++i)
          out << to_string(rec.algorithm) << ',' << rec.trial << ',' << k << ',' << i << ',' << fmt(rec.mse(k, i)) << '\n';
    }
}

inline void write_mse_total(const std::string& path, const LocalizationResult& res) {
  auto out = open_out(path);
  out << "algorithm,timestep,mean_total_mse,n_trials,n_diverged\n";
  for (std::size_t a = 0; a < res.algorithms.size(); ++a) {
    MseCurves c;
    try {
      c = mse_curves(res.records[a]);
    } catch (const Error& e) {
      if (e.code() != Errc::all_diverged) throw;
      continue;
    }
    for (std::size_t k = 0; k < c.total_mean.size(); ++k)
      out << to_string(res.algorithms[a]) << ',' << k << ',' << fmt(c.total_mean[k]) << ',' << c.n_trials << ','
          << c.n_diverged << '\n';
  }
}

inline void write_ellipses(const std::string& path, const LocalizationResult& res, std::size_t trial = 0,
                           double level = kEllipseLevel) {
  auto out = open_out(path);
  out << "algorithm,agent,cx,cy,m11,m12,m22,level\n";
  for (std::size_t a = 0; a < res.algorithms.size(); ++a) {
    if (trial >= res.records[a].size()) continue;
    const auto& rec = res.records[a][trial];
    if (rec.dim != 2) continue;
    for (const auto& e : export_ellipses(rec, level))
      out << to_string(rec.algorithm) << ',' << e.agent << ',' << fmt(e.cx) << ',' << fmt(e.cy) << ',' << fmt(e.m11)
          << ',' << fmt(e.m12) << ',' << fmt(e.m22) << ',' << fmt(e.level) << '\n';
  }
}

inline void write_scan(const std::string& path, const std::vector<ScanRecord>& rows) {
  auto out = open_out(path);
  out << "lambda,side,n_vertices,phi_max,seed\n";
  for (const auto& r : rows)
    out << fmt(r.lambda) << ',' << fmt(r.side) << ',' << r.n_vertices << ',' << r.phi_max << ',' << r.seed << '\n';
}

}  // namespace lbekf::io
