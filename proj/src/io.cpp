// src/io.cpp

// Copyright 2026  pldanorm authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "pldanorm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace pldanorm {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string &path, std::ios_base::openmode mode = std::ios_base::out) {
  std::ofstream out(path, mode);
  if (!out) throw InvalidInput("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string &path, std::ios_base::openmode mode = std::ios_base::in) {
  std::ifstream in(path, mode);
  if (!in) throw InvalidInput("cannot open " + path);
  return in;
}

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string &tok, const std::string &path, int lineno) {
  double v = 0.0;
  const char *first = tok.data();
  const char *last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw InvalidInput(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
  return v;
}

long parse_long(const std::string &tok, const std::string &path, int lineno) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw InvalidInput(path + ":" + std::to_string(lineno) + ": bad integer '" + tok + "'");
  return v;
}

json vector_to_json(const Vector &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_to_json(const Matrix &m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const json &a, const std::string &what) {
  if (!a.is_array()) throw InvalidInput("container field " + what + " is not an array");
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

Matrix matrix_from_json(const json &a, const std::string &what) {
  if (!a.is_array()) throw InvalidInput("container field " + what + " is not an array");
  const Eigen::Index rows = static_cast<Eigen::Index>(a.size());
  Eigen::Index cols = 0;
  if (rows > 0) {
    if (!a[0].is_array()) throw InvalidInput("container field " + what + " is not a 2-d array");
    cols = static_cast<Eigen::Index>(a[0].size());
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json &row = a[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw InvalidInput("container field " + what + " has ragged rows");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

bool ends_with(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Binary container layout, little-endian throughout:
//   8 bytes   magic "PLDNRM01"
//   u32       flags: bit 0 plda, bit 1 whitening, bit 2 seed
//   [plda]    i32 d, f, g; then m (d), F (d*f row-major), G (d*g), Sigma (d)
//   [whiten]  i32 dw; then mean (dw), W (dw*dw row-major)
//   [seed]    u64
constexpr char kMagic[8] = {'P', 'L', 'D', 'N', 'R', 'M', '0', '1'};

void put_raw(std::ofstream &out, const void *p, std::size_t n) {
  out.write(static_cast<const char *>(p), static_cast<std::streamsize>(n));
}

void get_raw(std::ifstream &in, void *p, std::size_t n, const std::string &path) {
  in.read(static_cast<char *>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw InvalidInput(path + ": truncated container file");
}

void put_matrix(std::ofstream &out, const Matrix &m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      put_raw(out, &v, sizeof v);
    }
}

Matrix get_matrix(std::ifstream &in, Eigen::Index rows, Eigen::Index cols,
                  const std::string &path) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v;
      get_raw(in, &v, sizeof v, path);
      m(i, j) = v;
    }
  return m;
}

}  // namespace

void write_ivector_csv(const std::string &path, const LabeledDataset &data) {
  if (!data.speakers.empty() &&
      static_cast<Eigen::Index>(data.speakers.size()) != data.X.rows())
    throw InvalidInput("speaker label count does not match the number of vectors");
  std::ofstream out = open_out(path);
  const bool labeled = !data.speakers.empty();
  const Eigen::Index d = data.X.cols();

  out << "id";
  if (labeled) out << ",speaker";
  for (Eigen::Index j = 0; j < d; ++j) out << ",dim_" << j;
  out << "\n";
  for (Eigen::Index r = 0; r < data.X.rows(); ++r) {
    out << (data.ids.empty() ? "row_" + std::to_string(r) : data.ids[r]);
    if (labeled) out << "," << data.speakers[r];
    for (Eigen::Index j = 0; j < d; ++j) out << "," << format_double(data.X(r, j));
    out << "\n";
  }
  if (!out) throw InvalidInput("write failed for " + path);
}

LabeledDataset read_ivector_csv(const std::string &path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "id")
    throw InvalidInput(path + ": header must start with 'id'");
  const bool labeled = header.size() > 1 && header[1] == "speaker";
  const std::size_t first_dim = labeled ? 2 : 1;
  const int d = static_cast<int>(header.size() - first_dim);
  if (d < 1) throw InvalidInput(path + ": no dim_* columns");
  for (int j = 0; j < d; ++j)
    if (header[first_dim + j] != "dim_" + std::to_string(j))
      throw InvalidInput(path + ": expected column dim_" + std::to_string(j));

  std::vector<std::string> ids, speakers;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> toks = split_csv_line(line);
    if (toks.size() != header.size())
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(header.size()) + " columns, got " +
                         std::to_string(toks.size()));
    if (!seen.insert(toks[0]).second)
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": duplicate id '" +
                         toks[0] + "'");
    ids.push_back(toks[0]);
    if (labeled) speakers.push_back(toks[1]);
    for (int j = 0; j < d; ++j) {
      const double v = parse_double(toks[first_dim + j], path, lineno);
      if (!std::isfinite(v))
        throw InvalidInput(path + ":" + std::to_string(lineno) + ": non-finite value");
      values.push_back(v);
    }
  }
  if (ids.empty()) throw InvalidInput(path + ": no data rows");

  LabeledDataset data;
  data.X = Matrix(static_cast<Eigen::Index>(ids.size()), d);
  for (std::size_t r = 0; r < ids.size(); ++r)
    for (int j = 0; j < d; ++j)
      data.X(static_cast<Eigen::Index>(r), j) = values[r * static_cast<std::size_t>(d) + j];
  data.ids = std::move(ids);
  data.speakers = std::move(speakers);
  if (labeled) data.build_index();
  return data;
}

std::vector<TrialRecord> read_trials_csv(const std::string &path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  const bool keyed = header.size() == 3 && header[2] == "key";
  if (!(header.size() == 2 || keyed) || header[0] != "model_id" || header[1] != "test_id")
    throw InvalidInput(path + ": header must be model_id,test_id[,key]");

  std::vector<TrialRecord> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> toks = split_csv_line(line);
    if (toks.size() != header.size())
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": wrong column count");
    TrialRecord t;
    t.model_id = toks[0];
    t.test_id = toks[1];
    if (keyed) {
      if (toks[2] == "target") t.target = true;
      else if (toks[2] == "nontarget") t.target = false;
      else
        throw InvalidInput(path + ":" + std::to_string(lineno) +
                           ": key must be target or nontarget, got '" + toks[2] + "'");
    }
    rows.push_back(std::move(t));
  }
  return rows;
}

void write_trials_csv(const std::string &path, const std::vector<TrialRecord> &rows) {
  const bool keyed = !rows.empty() && rows.front().target.has_value();
  std::ofstream out = open_out(path);
  out << (keyed ? "model_id,test_id,key\n" : "model_id,test_id\n");
  for (const TrialRecord &t : rows) {
    if (t.target.has_value() != keyed)
      throw InvalidInput("trial list mixes keyed and unkeyed rows");
    out << t.model_id << "," << t.test_id;
    if (keyed) out << "," << (*t.target ? "target" : "nontarget");
    out << "\n";
  }
  if (!out) throw InvalidInput("write failed for " + path);
}

void write_scores_csv(const std::string &path, const std::vector<ScoreRow> &rows) {
  const bool with_norm = !rows.empty() && rows.front().norm.has_value();
  std::ofstream out = open_out(path);
  out << (with_norm ? "model_id,test_id,raw_score,norm_score\n"
                    : "model_id,test_id,raw_score\n");
  for (const ScoreRow &r : rows) {
    if (r.norm.has_value() != with_norm)
      throw InvalidInput("score rows mix normalized and raw-only entries");
    out << r.model_id << "," << r.test_id << "," << format_double(r.raw);
    if (with_norm) out << "," << format_double(*r.norm);
    out << "\n";
  }
  if (!out) throw InvalidInput("write failed for " + path);
}

std::vector<ScoreRow> read_scores_csv(const std::string &path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  const bool with_norm = header.size() == 4 && header[3] == "norm_score";
  if (!(header.size() == 3 || with_norm) || header[0] != "model_id" ||
      header[1] != "test_id" || header[2] != "raw_score")
    throw InvalidInput(path + ": header must be model_id,test_id,raw_score[,norm_score]");

  std::vector<ScoreRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> toks = split_csv_line(line);
    if (toks.size() != header.size())
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": wrong column count");
    ScoreRow r;
    r.model_id = toks[0];
    r.test_id = toks[1];
    r.raw = parse_double(toks[2], path, lineno);
    if (with_norm) r.norm = parse_double(toks[3], path, lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_stats_csv(const std::string &path, const std::vector<SpeakerCalRow> &rows) {
  std::ofstream out = open_out(path);
  out << "speaker,L,mu1,var1,mu2,var2,threshold,scale\n";
  for (const SpeakerCalRow &r : rows) {
    out << r.speaker_id << "," << r.L << "," << format_double(r.mu1) << ","
        << format_double(r.var1) << "," << format_double(r.mu2) << ","
        << format_double(r.var2) << "," << format_double(r.threshold) << ","
        << format_double(r.scale) << "\n";
  }
  if (!out) throw InvalidInput("write failed for " + path);
}

std::vector<SpeakerCalRow> read_stats_csv(const std::string &path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + ": empty file");
  if (split_csv_line(line) !=
      std::vector<std::string>{"speaker", "L", "mu1", "var1", "mu2", "var2",
                               "threshold", "scale"})
    throw InvalidInput(path + ": unexpected stats header");
  std::vector<SpeakerCalRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> toks = split_csv_line(line);
    if (toks.size() != 8)
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": wrong column count");
    SpeakerCalRow r;
    r.speaker_id = toks[0];
    r.L = static_cast<int>(parse_long(toks[1], path, lineno));
    r.mu1 = parse_double(toks[2], path, lineno);
    r.var1 = parse_double(toks[3], path, lineno);
    r.mu2 = parse_double(toks[4], path, lineno);
    r.var2 = parse_double(toks[5], path, lineno);
    r.threshold = parse_double(toks[6], path, lineno);
    r.scale = parse_double(toks[7], path, lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

void save_model_container(const std::string &path, const ModelContainer &c) {
  if (c.plda) c.plda->validate();
  if (ends_with(path, ".json")) {
    json j;
    j["format"] = "pldanorm-model";
    j["version"] = 1;
    if (c.plda) {
      const PldaParameters &p = *c.plda;
      json jp;
      jp["d"] = p.d;
      jp["f"] = p.f;
      jp["g"] = p.g;
      jp["m"] = vector_to_json(p.m);
      jp["F"] = matrix_to_json(p.F);
      jp["G"] = matrix_to_json(p.G);
      jp["Sigma"] = vector_to_json(p.Sigma);
      j["plda"] = std::move(jp);
    }
    if (c.whitening) {
      json jw;
      jw["mean"] = vector_to_json(c.whitening->mean);
      jw["W"] = matrix_to_json(c.whitening->W);
      j["whitening"] = std::move(jw);
    }
    if (c.seed) j["seed"] = *c.seed;
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) throw InvalidInput("write failed for " + path);
    return;
  }

  std::ofstream out = open_out(path, std::ios_base::out | std::ios_base::binary);
  put_raw(out, kMagic, sizeof kMagic);
  const std::uint32_t flags = (c.plda ? 1u : 0u) | (c.whitening ? 2u : 0u) |
                              (c.seed ? 4u : 0u);
  put_raw(out, &flags, sizeof flags);
  if (c.plda) {
    const PldaParameters &p = *c.plda;
    const std::int32_t dims[3] = {p.d, p.f, p.g};
    put_raw(out, dims, sizeof dims);
    put_matrix(out, p.m);
    put_matrix(out, p.F);
    put_matrix(out, p.G);
    put_matrix(out, p.Sigma);
  }
  if (c.whitening) {
    const std::int32_t dw = static_cast<std::int32_t>(c.whitening->mean.size());
    put_raw(out, &dw, sizeof dw);
    put_matrix(out, c.whitening->mean);
    put_matrix(out, c.whitening->W);
  }
  if (c.seed) put_raw(out, &*c.seed, sizeof *c.seed);
  if (!out) throw InvalidInput("write failed for " + path);
}

ModelContainer load_model_container(const std::string &path) {
  ModelContainer c;
  if (ends_with(path, ".json")) {
    std::ifstream in = open_in(path);
    json j;
    try {
      in >> j;
    } catch (const json::parse_error &e) {
      throw InvalidInput(path + ": " + e.what());
    }
    if (j.value("format", "") != "pldanorm-model")
      throw InvalidInput(path + ": not a model container");
    if (j.contains("plda")) {
      const json &jp = j["plda"];
      PldaParameters p;
      p.d = jp.at("d").get<int>();
      p.f = jp.at("f").get<int>();
      p.g = jp.at("g").get<int>();
      p.m = vector_from_json(jp.at("m"), "m");
      p.F = matrix_from_json(jp.at("F"), "F");
      p.G = matrix_from_json(jp.at("G"), "G");
      p.Sigma = vector_from_json(jp.at("Sigma"), "Sigma");
      p.validate();
      c.plda = std::move(p);
    }
    if (j.contains("whitening")) {
      WhiteningTransform w;
      w.mean = vector_from_json(j["whitening"].at("mean"), "whitening.mean");
      w.W = matrix_from_json(j["whitening"].at("W"), "whitening.W");
      if (w.W.rows() != w.W.cols() || w.W.rows() != w.mean.size())
        throw InvalidInput(path + ": inconsistent whitening shapes");
      c.whitening = std::move(w);
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    return c;
  }

  std::ifstream in = open_in(path, std::ios_base::in | std::ios_base::binary);
  char magic[8];
  get_raw(in, magic, sizeof magic, path);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw InvalidInput(path + ": not a model container");
  std::uint32_t flags = 0;
  get_raw(in, &flags, sizeof flags, path);
  if (flags & 1u) {
    std::int32_t dims[3];
    get_raw(in, dims, sizeof dims, path);
    PldaParameters p;
    p.d = dims[0];
    p.f = dims[1];
    p.g = dims[2];
    if (p.d <= 0 || p.f < 0 || p.g < 0 || p.d > (1 << 20))
      throw InvalidInput(path + ": implausible dimensions");
    p.m = get_matrix(in, p.d, 1, path);
    p.F = get_matrix(in, p.d, p.f, path);
    p.G = get_matrix(in, p.d, p.g, path);
    p.Sigma = get_matrix(in, p.d, 1, path);
    p.validate();
    c.plda = std::move(p);
  }
  if (flags & 2u) {
    std::int32_t dw = 0;
    get_raw(in, &dw, sizeof dw, path);
    if (dw <= 0 || dw > (1 << 20)) throw InvalidInput(path + ": implausible dimensions");
    WhiteningTransform w;
    w.mean = get_matrix(in, dw, 1, path);
    w.W = get_matrix(in, dw, dw, path);
    c.whitening = std::move(w);
  }
  if (flags & 4u) {
    std::uint64_t seed = 0;
    get_raw(in, &seed, sizeof seed, path);
    c.seed = seed;
  }
  return c;
}

}  // namespace pldanorm
