#include "qio/io.hpp"

#include <fstream>
#include <sstream>

#include "qio/error.hpp"

namespace qio::io {

namespace {

[[noreturn]] void bad(const std::string& what) { fail(Errc::parse_error, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) bad("expected an object holding \"" + std::string(key) + "\"");
  auto it = j.find(key);
  if (it == j.end()) bad("missing field \"" + std::string(key) + "\"");
  return *it;
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) bad(what + " must be a number");
  return j.get<double>();
}

CMatrix complex_matrix(const json& j, const char* re, const char* im, Index dim, const std::string& what) {
  const Matrix r = matrix_from_json(field(j, re), what + "." + re);
  Matrix i = Matrix::Zero(r.rows(), r.cols());
  if (j.contains(im)) i = matrix_from_json(j.at(im), what + "." + im);
  if (r.rows() != dim || r.cols() != dim || i.rows() != dim || i.cols() != dim)
    bad(what + " must be " + std::to_string(dim) + " x " + std::to_string(dim));
  CMatrix out(dim, dim);
  out.real() = r;
  out.imag() = i;
  return out;
}

/// Maps a byte offset to 1-based line and column.
std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Quadrature quadrature_from_json(const json& j) {
  if (!j.is_string()) bad("quadrature must be \"Q\" or \"P\"");
  const std::string s = j.get<std::string>();
  if (s == "Q") return Quadrature::Q;
  if (s == "P") return Quadrature::P;
  bad("quadrature must be \"Q\" or \"P\", got \"" + s + "\"");
}

}  // namespace

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, col] = line_col(text, at);
    std::string msg = e.what();
    const auto cut = msg.find("syntax error");
    if (cut != std::string::npos) msg = msg.substr(cut);
    fail(Errc::parse_error, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::invalid_argument, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path.string());
}

void write_json_file(const std::filesystem::path& path, const json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::invalid_argument, "cannot write " + path.string());
  out << value.dump(2) << '\n';
  if (!out) fail(Errc::invalid_argument, "write failed for " + path.string());
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) bad(what + " must be a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) bad(what + " must be an array of non-empty rows");
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) bad(what + " has ragged rows");
    for (Index k = 0; k < cols; ++k)
      m(i, k) = number(row[static_cast<std::size_t>(k)], what + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
  }
  return m;
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) bad(what + " must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], what + "[" + std::to_string(i) + "]");
  return v;
}

QMarkovModel model_from_json(const json& j) {
  const json& d = field(j, "dim");
  if (!d.is_number_integer() || d.get<long long>() < 1) bad("dim must be a positive integer");
  const Index dim = d.get<Index>();
  return QMarkovModel(complex_matrix(j, "H_re", "H_im", dim, "model"), complex_matrix(j, "L_re", "L_im", dim, "model"));
}

json to_json(const QMarkovModel& model) {
  return json{{"dim", model.dim()},
              {"H_re", to_json(Matrix(model.H().real()))},
              {"H_im", to_json(Matrix(model.H().imag()))},
              {"L_re", to_json(Matrix(model.L().real()))},
              {"L_im", to_json(Matrix(model.L().imag()))}};
}

MeasurementRecord record_from_json(const json& j) {
  const json& kind = field(j, "kind");
  if (!kind.is_string()) bad("record kind must be a string");
  const std::string k = kind.get<std::string>();
  if (k == "diffusive") {
    DiffusiveRecord r;
    r.dt = number(field(j, "dt"), "dt");
    const Vector inc = vector_from_json(field(j, "increments"), "increments");
    r.increments.assign(inc.data(), inc.data() + inc.size());
    r.validate();
    return r;
  }
  if (k == "counting") {
    CountingRecord r;
    r.horizon = number(field(j, "horizon"), "horizon");
    const Vector jumps = vector_from_json(field(j, "jumps"), "jumps");
    r.jumps.assign(jumps.data(), jumps.data() + jumps.size());
    r.validate();
    return r;
  }
  bad("record kind must be \"diffusive\" or \"counting\", got \"" + k + "\"");
}

json to_json(const MeasurementRecord& record) {
  if (const auto* d = std::get_if<DiffusiveRecord>(&record))
    return json{{"kind", "diffusive"}, {"dt", d->dt}, {"increments", d->increments}};
  const auto& c = std::get<CountingRecord>(record);
  return json{{"kind", "counting"}, {"horizon", c.horizon}, {"jumps", c.jumps}};
}

LinearQSystem linear_system_from_json(const json& j) {
  const json& n = field(j, "n");
  if (!n.is_number_integer() || n.get<long long>() < 1) bad("n must be a positive integer");
  Matrix D = Matrix::Identity(2, 2);
  if (j.contains("D")) D = matrix_from_json(j.at("D"), "D");
  LinearQSystem g;
  g.n = n.get<Index>();
  g.A = matrix_from_json(field(j, "A"), "A");
  g.B = matrix_from_json(field(j, "B"), "B");
  g.C = matrix_from_json(field(j, "C"), "C");
  g.D = D;
  g.validate();
  return g;
}

json to_json(const LinearQSystem& g) {
  return json{{"n", g.n}, {"A", to_json(g.A)}, {"B", to_json(g.B)}, {"C", to_json(g.C)}, {"D", to_json(g.D)}};
}

ParameterFamily family_from_json(const json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  const QMarkovModel base = model_from_json(field(j, "model"));
  Box domain{vector_from_json(field(j, "lower"), "lower"), vector_from_json(field(j, "upper"), "upper")};
  if (kind == "phase") return ParameterFamily::phase(base, domain);
  if (kind != "affine") bad("family kind must be \"affine\" or \"phase\", got \"" + kind + "\"");
  auto dirs = [&](const char* key) {
    std::vector<CMatrix> out;
    const json& list = field(j, key);
    if (!list.is_array()) bad(std::string(key) + " must be an array");
    for (std::size_t a = 0; a < list.size(); ++a)
      out.push_back(complex_matrix(list[a], "re", "im", base.dim(), std::string(key) + "[" + std::to_string(a) + "]"));
    return out;
  };
  return ParameterFamily::affine(base, dirs("H_dirs"), dirs("L_dirs"), domain);
}

SysIdDataset dataset_from_json(const json& j) {
  SysIdDataset d;
  d.dt = number(field(j, "dt"), "dt");
  d.outputs = vector_from_json(field(j, "outputs"), "outputs");
  const json& in = field(j, "inputs");
  if (d.outputs.size() == 0) {
    d.inputs = Matrix(2, 0);
  } else {
    d.inputs = matrix_from_json(in, "inputs");
  }
  if (j.contains("split")) d.split = number(j.at("split"), "split");
  if (d.inputs.rows() != 2) bad("inputs must hold two channels");
  return d;
}

json to_json(const SysIdDataset& data) {
  return json{{"dt", data.dt}, {"inputs", to_json(data.inputs)}, {"outputs", to_json(data.outputs)}, {"split", data.split}};
}

PipelineConfig pipeline_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) bad("pipeline config must be an object");
  PipelineConfig c;
  const bool has_system = j.contains("system_file"), has_data = j.contains("dataset_file");
  if (has_system == has_data) bad("pipeline config needs exactly one of \"system_file\" and \"dataset_file\"");
  if (has_system) c.system = linear_system_from_json(read_json_file(base_dir / j.at("system_file").get<std::string>()));
  if (has_data) c.dataset = dataset_from_json(read_json_file(base_dir / j.at("dataset_file").get<std::string>()));
  if (j.contains("dt")) c.dt = number(j.at("dt"), "dt");
  if (j.contains("T")) c.T = number(j.at("T"), "T");
  if (j.contains("prbs_amplitude")) c.prbs_amplitude = number(j.at("prbs_amplitude"), "prbs_amplitude");
  if (j.contains("prbs_hold")) c.prbs_hold = j.at("prbs_hold").get<Index>();
  if (j.contains("orders")) c.orders = j.at("orders").get<std::vector<Index>>();
  if (j.contains("quadrature")) c.quadrature = quadrature_from_json(j.at("quadrature"));
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("split")) c.split = number(j.at("split"), "split");
  if (j.contains("horizon")) c.horizon = j.at("horizon").get<Index>();
  if (j.contains("projection_starts")) c.projection_starts = j.at("projection_starts").get<int>();
  if (j.contains("scheme")) {
    const std::string s = j.at("scheme").get<std::string>();
    if (s == "exact") c.scheme = InnovationScheme::exact;
    else if (s == "euler") c.scheme = InnovationScheme::euler;
    else bad("scheme must be \"exact\" or \"euler\"");
  }
  if (c.dataset && j.contains("split")) c.dataset->split = c.split;
  return c;
}

json to_json(const SysIdResult& r) {
  json fpe = json::array();
  for (const FpeEntry& e : r.fpe.table)
    fpe.push_back(json{{"order", e.order}, {"V_N", e.vn}, {"parameters", e.parameters}, {"fpe", e.fpe}});
  const auto& p = r.projection;
  double best_fpe = 0.0;
  for (const FpeEntry& e : r.fpe.table)
    if (e.order == r.order) best_fpe = e.fpe;
  return json{{"order", r.order},
              {"raw", {{"A", to_json(r.raw.A)}, {"B", to_json(r.raw.B)}, {"C_m", to_json(r.raw.Cm)}}},
              {"raw_discrete",
               {{"A", to_json(r.raw_discrete.model.A)},
                {"B", to_json(r.raw_discrete.model.B)},
                {"C", to_json(r.raw_discrete.model.C)},
                {"D", to_json(r.raw_discrete.model.D)},
                {"K", to_json(r.raw_discrete.model.K)},
                {"singular_values", to_json(r.raw_discrete.singular_values)}}},
              {"projected", to_json(p.system)},
              {"Z", to_json(p.Z)},
              {"cost", p.cost},
              {"start_costs", p.start_costs},
              {"cost_spread", p.spread},
              {"pr2_residual", p.pr2_residual},
              {"L_m", to_json(r.L_m)},
              {"fpe", best_fpe},
              {"fpe_table", fpe},
              {"nmse", r.nmse}};
}

json report(const std::string& command, const json& config, json body) {
  json out{{"tool", "qiokit"}, {"version", QIOKIT_VERSION}, {"command", command}, {"config", config}};
  for (auto& [k, v] : body.items()) out[k] = v;
  return out;
}

}  // namespace qio::io
