#include "semcert/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace semcert::io {

namespace {

double as_number(const json& j, const char* what) {
  if (!j.is_number()) fail(Errc::InvalidFormat, std::string(what) + " must be a number");
  return j.get<double>();
}

int as_int(const json& j, const char* what) {
  if (!j.is_number_integer()) fail(Errc::InvalidFormat, std::string(what) + " must be an integer");
  return j.get<int>();
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) fail(Errc::InvalidFormat, std::string(what) + " must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(Errc::InvalidFormat, std::string(what) + " rows must be non-empty arrays");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      fail(Errc::InvalidFormat, std::string(what) + " rows must all have length " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = as_number(j[i][c], what);
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) fail(Errc::InvalidFormat, std::string(what) + " must be an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(as_number(e, what));
  return v;
}

// Explicit per-(x, y, t) joints loaded from a file.
class FileProvider final : public CouplingProvider {
 public:
  FileProvider(std::size_t n) : n_(n) {}

  void add(std::size_t x, std::size_t y, int t, SparseJoint joint) {
    entries_[{x, y, t}] = std::move(joint);
  }

  SparseJoint joint(std::size_t x, std::size_t y, int t) const override {
    auto it = entries_.find({x, y, t});
    if (it == entries_.end())
      fail(Errc::InvalidArgument, "provider file has no entry for (" + std::to_string(x) + "," +
                                      std::to_string(y) + ",t=" + std::to_string(t) + ")");
    return it->second;
  }

 private:
  std::size_t n_;
  std::map<std::tuple<std::size_t, std::size_t, int>, SparseJoint> entries_;
};

}  // namespace

void require_keys(const json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) fail(Errc::InvalidFormat, std::string(what) + " must be a JSON object");
  for (const char* k : keys)
    if (!j.contains(k)) fail(Errc::InvalidFormat, std::string(what) + " is missing key \"" + k + "\"");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) fail(Errc::InvalidFormat, std::string(what) + " has unknown key \"" + key + "\"");
  }
}

MetricSpace space_from_json(const json& j) {
  require_keys(j, {"states", "distance", "base_point"}, "space");
  if (!j["states"].is_array()) fail(Errc::InvalidFormat, "states must be an array of strings");
  std::vector<std::string> labels;
  for (const auto& s : j["states"]) {
    if (!s.is_string()) fail(Errc::InvalidFormat, "states must be an array of strings");
    labels.push_back(s.get<std::string>());
  }
  Matrix d = matrix_from_json(j["distance"], "distance");
  const int base = as_int(j["base_point"], "base_point");
  if (base < 0) fail(Errc::BadBaseIndex, "base_point must be >= 0");
  return MetricSpace::validated(std::move(labels), std::move(d), static_cast<std::size_t>(base));
}

json space_to_json(const MetricSpace& space) {
  json j;
  j["states"] = space.labels();
  j["distance"] = matrix_to_json(space.distance_matrix());
  j["base_point"] = space.base_index();
  return j;
}

Kernel kernel_from_json(const json& j) {
  require_keys(j, {"states", "distance", "base_point", "matrix"}, "kernel");
  json space_part;
  space_part["states"] = j["states"];
  space_part["distance"] = j["distance"];
  space_part["base_point"] = j["base_point"];
  MetricSpace space = space_from_json(space_part);
  Matrix m = matrix_from_json(j["matrix"], "matrix");
  return Kernel::validated(std::move(space), std::move(m));
}

json kernel_to_json(const Kernel& kernel) {
  json j = space_to_json(kernel.space());
  j["matrix"] = matrix_to_json(kernel.matrix());
  return j;
}

diagnostics::FuncDesc func_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type")) fail(Errc::InvalidFormat, "F must be an object with a type");
  const std::string type = j["type"].get<std::string>();
  if (type == "constant") {
    require_keys(j, {"type", "value"}, "F");
    return diagnostics::FuncDesc::constant(as_number(j["value"], "F.value"));
  }
  if (type == "affine") {
    require_keys(j, {"type", "a", "b"}, "F");
    return diagnostics::FuncDesc::affine(as_number(j["a"], "F.a"), as_number(j["b"], "F.b"));
  }
  if (type == "table") {
    require_keys(j, {"type", "args", "values"}, "F");
    return diagnostics::FuncDesc::table(vector_from_json(j["args"], "F.args"),
                                        vector_from_json(j["values"], "F.values"));
  }
  fail(Errc::InvalidFormat, "F.type must be constant, affine or table");
}

json func_to_json(const diagnostics::FuncDesc& f) {
  json j;
  switch (f.kind()) {
    case diagnostics::FuncDesc::Kind::Constant:
      j["type"] = "constant";
      j["value"] = f.offset();
      break;
    case diagnostics::FuncDesc::Kind::Affine:
      j["type"] = "affine";
      j["a"] = f.slope();
      j["b"] = f.offset();
      break;
    case diagnostics::FuncDesc::Kind::Table:
      j["type"] = "table";
      j["args"] = f.args();
      j["values"] = f.values();
      break;
  }
  return j;
}

diagnostics::AsfPlusCertificate certificate_from_json(const json& j) {
  require_keys(j, {"x0", "times", "slacks", "F", "F_bounded"}, "certificate");
  diagnostics::AsfPlusCertificate cert;
  const int x0 = as_int(j["x0"], "x0");
  if (x0 < 0) fail(Errc::BadBaseIndex, "x0 must be >= 0");
  cert.x0 = static_cast<std::size_t>(x0);
  for (const auto& t : j["times"]) cert.times.push_back(as_int(t, "times"));
  cert.slacks = vector_from_json(j["slacks"], "slacks");
  cert.F = func_from_json(j["F"]);
  if (!j["F_bounded"].is_boolean()) fail(Errc::InvalidFormat, "F_bounded must be a boolean");
  cert.F_bounded = j["F_bounded"].get<bool>();
  return cert;
}

json certificate_to_json(const diagnostics::AsfPlusCertificate& cert) {
  json j;
  j["x0"] = cert.x0;
  j["times"] = cert.times;
  j["slacks"] = cert.slacks;
  j["F"] = func_to_json(cert.F);
  j["F_bounded"] = cert.F_bounded;
  return j;
}

ProviderFile provider_from_json(const json& j, std::size_t space_size) {
  ProviderFile out;
  if (j.is_object()) {
    require_keys(j, {"builtin", "params"}, "provider");
    out.builtin = true;
    out.name = j["builtin"].get<std::string>();
    out.params = j["params"];
    return out;
  }
  if (!j.is_array()) fail(Errc::InvalidFormat, "provider must be an object or an array of joints");
  auto provider = std::make_unique<FileProvider>(space_size);
  for (const auto& e : j) {
    require_keys(e, {"x", "y", "t", "joint"}, "provider entry");
    const int x = as_int(e["x"], "x"), y = as_int(e["y"], "y"), t = as_int(e["t"], "t");
    if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= space_size || static_cast<std::size_t>(y) >= space_size)
      fail(Errc::InvalidFormat, "provider entry state out of range");
    Matrix m = matrix_from_json(e["joint"], "joint");
    if (m.rows() != space_size || m.cols() != space_size)
      fail(Errc::InvalidFormat, "provider joint must be square over the space");
    SparseJoint joint;
    joint.n = space_size;
    for (std::size_t a = 0; a < m.rows(); ++a)
      for (std::size_t b = 0; b < m.cols(); ++b)
        if (m(a, b) != 0.0) joint.entries.push_back({a, b, m(a, b)});
    provider->add(static_cast<std::size_t>(x), static_cast<std::size_t>(y), t, std::move(joint));
  }
  out.explicit_provider = std::move(provider);
  return out;
}

json coupling_to_json(const transport::Coupling& c, const MetricSpace& space) {
  json j;
  json rows = json::array(), cols = json::array();
  for (std::size_t i = 0; i < c.rows; ++i) rows.push_back(space.label(i));
  for (std::size_t i = 0; i < c.cols; ++i) cols.push_back(space.label(i));
  j["rows"] = std::move(rows);
  j["cols"] = std::move(cols);
  j["joint"] = matrix_to_json(c.dense());
  return j;
}

json report_to_json(const diagnostics::AsfPlusReport& r, const MetricSpace& space) {
  json j;
  j["check"] = "asf-plus";
  j["pass"] = r.pass;
  j["slack"] = r.slack;
  json records = json::array();
  for (const auto& rec : r.records) {
    json e;
    e["x"] = space.label(rec.x);
    e["y"] = space.label(rec.y);
    e["t"] = rec.t;
    e["A"] = rec.A;
    e["K"] = rec.K;
    e["lhs"] = rec.lhs;
    e["rhs"] = rec.rhs;
    e["margin"] = rec.margin;
    e["pass"] = rec.pass;
    records.push_back(std::move(e));
  }
  j["records"] = std::move(records);
  if (!r.records.empty()) {
    const auto& w = r.records[r.worst];
    j["worst"] = {{"x", space.label(w.x)}, {"y", space.label(w.y)}, {"t", w.t},
                  {"A", w.A},              {"K", w.K},              {"margin", w.margin}};
  }
  return j;
}

json report_to_json(const diagnostics::LwiReport& r, const MetricSpace& space) {
  json j;
  j["check"] = "lwi";
  j["pass"] = r.pass;
  j["R"] = r.R;
  j["eps"] = r.eps;
  j["ball_size"] = r.ball_size;
  j["first_passing_time"] = r.first_passing_time;
  json recs = json::array();
  for (const auto& rec : r.per_time) {
    json e;
    e["t"] = rec.t;
    e["value"] = rec.value;
    e["argmin_x"] = space.label(rec.argmin_x);
    e["argmin_y"] = space.label(rec.argmin_y);
    e["positive"] = rec.positive;
    recs.push_back(std::move(e));
  }
  j["records"] = std::move(recs);
  return j;
}

json report_to_json(const diagnostics::A1Report& r, const MetricSpace& space) {
  json j;
  j["check"] = "a1";
  j["pass"] = r.pass;
  j["slack"] = r.slack;
  j["F1"] = func_to_json(r.F1);
  j["F2"] = func_to_json(r.F2);
  j["r"] = func_to_json(r.r);
  json recs = json::array();
  for (const auto& rec : r.records) {
    json e;
    e["x"] = space.label(rec.x);
    e["y"] = space.label(rec.y);
    e["t"] = rec.t;
    e["tv"] = rec.tv;
    e["tv_bound"] = rec.tv_bound;
    e["ed"] = rec.ed;
    e["ed_bound"] = rec.ed_bound;
    e["margin"] = rec.margin;
    e["pass"] = rec.pass;
    recs.push_back(std::move(e));
  }
  j["records"] = std::move(recs);
  return j;
}

json report_to_json(const diagnostics::A2Report& r, const MetricSpace& space) {
  json j;
  j["check"] = "a2";
  j["pass"] = r.pass;
  j["slack"] = r.slack;
  j["eps"] = r.eps;
  j["suggested_eps"] = r.suggested_eps;
  json recs = json::array();
  for (const auto& rec : r.records) {
    json e;
    e["x"] = space.label(rec.x);
    e["y"] = space.label(rec.y);
    e["t"] = rec.t;
    e["tv"] = rec.tv;
    e["ed"] = rec.ed;
    e["ed_bound"] = rec.ed_bound;
    e["margin"] = rec.margin;
    e["pass"] = rec.pass;
    recs.push_back(std::move(e));
  }
  j["records"] = std::move(recs);
  return j;
}

json report_to_json(const diagnostics::Verdict& v, const MetricSpace& space) {
  json j;
  j["check"] = "uniqueness";
  j["implied"] = v.implied;
  j["reason"] = v.reason;
  j["F_bounded"] = v.f_bounded;
  j["truncation_dependent"] = v.truncation_dependent;
  j["decomposition_count"] = v.decomposition_count;
  j["consistent"] = v.consistent;
  j["asf_plus"] = report_to_json(v.asf, space);
  j["lwi"] = report_to_json(v.lwi, space);
  return j;
}

json report_to_json(const diagnostics::SeparationResult& r, const MetricSpace& space) {
  json j;
  j["check"] = "separation";
  j["pass"] = r.pass;
  j["min_margin"] = r.min_margin;
  j["witness"] = {{"w1", space.label(r.witness_w1)}, {"w2", space.label(r.witness_w2)}};
  return j;
}

json report_to_json(const diagnostics::AsfProfile& p, const MetricSpace& space) {
  (void)space;
  json j;
  j["check"] = "asf";
  j["n_list"] = p.n_list;
  j["times"] = p.times;
  j["radii"] = p.radii;
  json values = json::array();
  for (std::size_t k = 0; k < p.n_list.size(); ++k) {
    json row = json::array();
    for (std::size_t ri = 0; ri < p.radii.size(); ++ri) row.push_back(p.values(k, ri));
    values.push_back(std::move(row));
  }
  j["values"] = std::move(values);
  j["tail_score"] = p.tail_score;
  json eb = json::array();
  for (const auto& row : p.empty_ball) {
    json r2 = json::array();
    for (char c : row) r2.push_back(static_cast<bool>(c));
    eb.push_back(std::move(r2));
  }
  j["empty_ball"] = std::move(eb);
  return j;
}

json decomposition_to_json(const ErgodicDecomposition& d, const MetricSpace& space) {
  json j;
  j["classes"] = json::array();
  for (std::size_t c = 0; c < d.measures.size(); ++c) {
    json cls;
    cls["class_id"] = c;
    json members = json::array(), weights = json::array();
    for (std::size_t i : d.class_members[c]) {
      members.push_back(space.label(i));
      weights.push_back(d.measures[c].w[i]);
    }
    cls["members"] = std::move(members);
    cls["weights"] = std::move(weights);
    j["classes"].push_back(std::move(cls));
  }
  return j;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string report_to_csv(const diagnostics::AsfPlusReport& r, const MetricSpace& space) {
  std::ostringstream os;
  os << "x,y,t,A,K,lhs,rhs,margin,pass\n";
  for (const auto& rec : r.records)
    os << csv_escape(space.label(rec.x)) << ',' << csv_escape(space.label(rec.y)) << ',' << rec.t << ','
       << format_double(rec.A) << ',' << format_double(rec.K) << ',' << format_double(rec.lhs) << ','
       << format_double(rec.rhs) << ',' << format_double(rec.margin) << ',' << (rec.pass ? 1 : 0) << '\n';
  return os.str();
}

std::string report_to_csv(const diagnostics::LwiReport& r, const MetricSpace& space) {
  std::ostringstream os;
  os << "t,value,argmin_x,argmin_y,positive\n";
  for (const auto& rec : r.per_time)
    os << rec.t << ',' << format_double(rec.value) << ',' << csv_escape(space.label(rec.argmin_x)) << ','
       << csv_escape(space.label(rec.argmin_y)) << ',' << (rec.positive ? 1 : 0) << '\n';
  return os.str();
}

std::string report_to_csv(const diagnostics::A1Report& r, const MetricSpace& space) {
  std::ostringstream os;
  os << "x,y,t,tv,tv_bound,ed,ed_bound,margin,pass\n";
  for (const auto& rec : r.records)
    os << csv_escape(space.label(rec.x)) << ',' << csv_escape(space.label(rec.y)) << ',' << rec.t << ','
       << format_double(rec.tv) << ',' << format_double(rec.tv_bound) << ',' << format_double(rec.ed) << ','
       << format_double(rec.ed_bound) << ',' << format_double(rec.margin) << ',' << (rec.pass ? 1 : 0) << '\n';
  return os.str();
}

std::string report_to_csv(const diagnostics::A2Report& r, const MetricSpace& space) {
  std::ostringstream os;
  os << "x,y,t,tv,ed,ed_bound,margin,pass\n";
  for (const auto& rec : r.records)
    os << csv_escape(space.label(rec.x)) << ',' << csv_escape(space.label(rec.y)) << ',' << rec.t << ','
       << format_double(rec.tv) << ',' << format_double(rec.ed) << ',' << format_double(rec.ed_bound) << ','
       << format_double(rec.margin) << ',' << (rec.pass ? 1 : 0) << '\n';
  return os.str();
}

std::string report_to_csv(const diagnostics::AsfProfile& p, const MetricSpace& space) {
  (void)space;
  std::ostringstream os;
  os << "n,t,radius,value,empty_ball\n";
  for (std::size_t k = 0; k < p.n_list.size(); ++k)
    for (std::size_t ri = 0; ri < p.radii.size(); ++ri)
      os << p.n_list[k] << ',' << p.times[k] << ',' << format_double(p.radii[ri]) << ','
         << format_double(p.values(k, ri)) << ',' << static_cast<int>(p.empty_ball[k][ri]) << '\n';
  return os.str();
}

std::string decomposition_to_csv(const ErgodicDecomposition& d, const MetricSpace& space) {
  std::ostringstream os;
  os << "class_id,state_label,weight\n";
  for (std::size_t c = 0; c < d.measures.size(); ++c)
    for (std::size_t i : d.class_members[c])
      os << c << ',' << csv_escape(space.label(i)) << ',' << format_double(d.measures[c].w[i]) << '\n';
  return os.str();
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidArgument, "cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(Errc::InvalidFormat, "cannot parse " + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(Errc::InvalidArgument, "cannot open file for writing: " + path);
  out << text;
}

}  // namespace semcert::io
