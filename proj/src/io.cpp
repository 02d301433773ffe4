#include "ruelle/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include <unistd.h>

namespace ruelle {

namespace {

[[noreturn]] void parse_error(const std::string& what) {
  throw Error(ErrorCode::SpecParseError, what);
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    parse_error(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) parse_error(std::string(what) + " must be a number");
  return j.get<double>();
}

int integer(const Json& j, const char* what) {
  if (!j.is_number_integer()) parse_error(std::string(what) + " must be an integer");
  return j.get<int>();
}

std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(number(x, what));
  return out;
}

// Lattice multi-indices of a radial profile in value order.
Json profile_indices(int n, int resolution) {
  Json out = Json::array();
  std::vector<int> k(n, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n - 1) {
      k[pos] = left;
      out.push_back(k);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, resolution);
  return out;
}

std::string kind_name(RegionKind k) {
  switch (k) {
    case RegionKind::Ellipsoid: return "ellipsoid";
    case RegionKind::PFamily: return "pfamily";
    case RegionKind::RadialProfile: return "radial_profile";
    case RegionKind::SmoothedUnion: return "smoothed_union";
  }
  return "";
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) parse_error("matrix must be a non-empty array of rows");
  const int rows = int(j.size());
  const int cols = j[0].is_array() ? int(j[0].size()) : 0;
  if (cols == 0 || rows > 2 * kMaxDim || cols > 2 * kMaxDim) {
    parse_error("matrix has an unsupported shape");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || int(j[i].size()) != cols) parse_error("ragged matrix rows");
    for (int c = 0; c < cols; ++c) m(i, c) = number(j[i][c], "matrix entry");
  }
  return m;
}

Json path_to_json(const SymplecticPath& path) {
  Json samples = Json::array();
  for (std::size_t i = 0; i < path.size(); ++i) {
    samples.push_back(Json::array({path.time(i), matrix_to_json(path.matrix(i))}));
  }
  Json j;
  j["n"] = path.n();
  j["samples"] = std::move(samples);
  return j;
}

SymplecticPath path_from_json(const Json& j) {
  const int n = integer(field(j, "n"), "n");
  if (n < 1 || n > kMaxDim) parse_error("path dimension out of range");
  const Json& s = field(j, "samples");
  if (!s.is_array() || s.empty()) parse_error("samples must be a non-empty array");
  std::vector<double> times;
  std::vector<Matrix> mats;
  for (const auto& entry : s) {
    if (!entry.is_array() || entry.size() != 2) parse_error("sample must be [t, matrix]");
    times.push_back(number(entry[0], "sample time"));
    Matrix m = matrix_from_json(entry[1]);
    if (m.rows() != 2 * n || m.cols() != 2 * n) parse_error("sample matrix must be 2n x 2n");
    mats.push_back(std::move(m));
  }
  return SymplecticPath(n, std::move(times), std::move(mats));
}

Json region_to_json(const MomentRegion& region) {
  Json j;
  j["n"] = region.dim();
  j["kind"] = kind_name(region.kind());
  switch (region.kind()) {
    case RegionKind::Ellipsoid:
      j["widths"] = region.widths();
      break;
    case RegionKind::PFamily:
      j["widths"] = region.widths();
      j["p"] = region.exponent();
      break;
    case RegionKind::RadialProfile:
      j["resolution"] = region.resolution();
      j["values"] = region.values();
      j["indices"] = profile_indices(region.dim(), region.resolution());
      break;
    case RegionKind::SmoothedUnion:
      j["collar"] = region.collar();
      j["left"] = region_to_json(region.left());
      j["right"] = region_to_json(region.right());
      break;
  }
  return j;
}

MomentRegion region_from_json(const Json& j) {
  if (!j.is_object()) parse_error("region must be a JSON object");
  const Json& kind = field(j, "kind");
  if (!kind.is_string()) parse_error("kind must be a string");
  const std::string k = kind.get<std::string>();
  const int n = integer(field(j, "n"), "n");
  if (n < 1 || n > kMaxDim) parse_error("region dimension out of range");
  auto widths = [&] {
    auto w = numbers(field(j, "widths"), "widths");
    if (int(w.size()) != n) parse_error("widths must have n entries");
    return w;
  };
  if (k == "ellipsoid") return MomentRegion::ellipsoid(widths());
  if (k == "pfamily") {
    auto w = widths();
    return MomentRegion::pfamily(std::move(w), number(field(j, "p"), "p"));
  }
  if (k == "radial_profile") {
    const int res = integer(field(j, "resolution"), "resolution");
    auto values = numbers(field(j, "values"), "values");
    if (j.contains("indices") && j.at("indices") != profile_indices(n, res)) {
      parse_error("profile indices do not match the lattice order");
    }
    return MomentRegion::radial_profile(n, res, std::move(values));
  }
  if (k == "smoothed_union") {
    const MomentRegion left = region_from_json(field(j, "left"));
    const MomentRegion right = region_from_json(field(j, "right"));
    if (left.dim() != n || right.dim() != n) parse_error("union children must match n");
    return MomentRegion::smoothed_union(left, right, number(field(j, "collar"), "collar"));
  }
  parse_error("unknown region kind '" + k + "'");
}

Json load_json(std::string_view text_or_path) {
  std::string text(text_or_path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) parse_error("empty specification");
  if (text[first] != '{' && text[first] != '[') {
    std::ifstream in(text);
    if (!in) parse_error("cannot open '" + text + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    parse_error(e.what());
  }
}

MomentRegion load_region(std::string_view text_or_path) {
  try {
    return region_from_json(load_json(text_or_path));
  } catch (const nlohmann::json::exception& e) {
    parse_error(e.what());
  }
}

Json counterexample_to_json(const CounterexampleSpec& spec) {
  Json j;
  j["base"] = region_to_json(spec.base);
  j["C_target"] = spec.c_target;
  j["epsilon"] = spec.epsilon;
  j["A"] = spec.A;
  j["B"] = spec.B;
  j["collar"] = spec.delta;
  j["unchanged"] = spec.unchanged;
  j["result"] = region_to_json(spec.result);
  return j;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw Error(ErrorCode::InvalidArgument, "write to '" + tmp + "' failed");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::InvalidArgument, "cannot rename onto '" + path + "'");
  }
}

void write_profile_csv(const MomentRegion& region, int resolution,
                       std::ostream& os) {
  const int n = region.dim();
  const CanonicalFunction f(region);
  os << std::setprecision(17);
  for (int i = 0; i < n; ++i) os << "u" << i + 1 << ",";
  os << "R";
  for (int i = 0; i < n; ++i) os << ",x" << i + 1;
  os << "\n";
  for (const auto& k : profile_indices(n, resolution)) {
    Point u(n);
    for (int i = 0; i < n; ++i) u(i) = k[i].get<double>() / resolution;
    const double r = f.radius(u);
    for (int i = 0; i < n; ++i) os << u(i) << ",";
    os << r;
    for (int i = 0; i < n; ++i) os << "," << r * u(i);
    os << "\n";
  }
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm: return "closed-form";
    case Provenance::Quadrature: return "quadrature";
    case Provenance::MonteCarlo: return "monte-carlo";
    case Provenance::CertifiedBound: return "certified-bound";
    case Provenance::Optimization: return "optimization";
    case Provenance::Exact: return "exact";
  }
  return "";
}

Report::Report(std::string command, Json config)
    : command_(std::move(command)), config_(std::move(config)) {}

void Report::quantity(const std::string& name, double value, Provenance p,
                      double error) {
  Json q;
  // JSON has no infinities; overflowing values are spelled out.
  if (std::isfinite(value)) {
    q["value"] = value;
  } else {
    q["value"] = value > 0 ? "+inf" : (value < 0 ? "-inf" : "nan");
  }
  q["error"] = error;
  q["provenance"] = to_string(p);
  quantities_[name] = std::move(q);
}

void Report::quantity(const std::string& name, long value) {
  Json q;
  q["value"] = value;
  q["error"] = 0;
  q["provenance"] = to_string(Provenance::Exact);
  quantities_[name] = std::move(q);
}

void Report::flag(const std::string& name, bool value) { flags_[name] = value; }

void Report::attach(const std::string& name, Json value) {
  attachments_[name] = std::move(value);
}

void Report::assertion(const std::string& name, bool pass,
                       const std::string& detail) {
  Json a;
  a["name"] = name;
  a["pass"] = pass;
  if (!detail.empty()) a["detail"] = detail;
  assertions_.push_back(std::move(a));
}

bool Report::passed() const {
  for (const auto& a : assertions_) {
    if (!a["pass"].get<bool>()) return false;
  }
  return true;
}

Json Report::to_json() const {
  Json j;
  j["command"] = command_;
  j["config"] = config_;
  j["input_hash"] = hex64(fnv1a(config_.dump()));
  j["quantities"] = quantities_;
  if (!flags_.empty()) j["flags"] = flags_;
  if (!attachments_.empty()) j["data"] = attachments_;
  j["assertions"] = assertions_;
  j["status"] = passed() ? "pass" : "fail";
  if (wall_time_ >= 0.0) j["wall_time_s"] = wall_time_;
  return j;
}

std::string Report::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "name,value,error,provenance\n";
  for (const auto& [name, q] : quantities_.items()) {
    os << name << ",";
    if (q["value"].is_string()) {
      os << q["value"].get<std::string>();
    } else {
      os << q["value"].get<double>();
    }
    os << "," << q["error"].get<double>() << "," << q["provenance"].get<std::string>()
       << "\n";
  }
  for (const auto& [name, v] : flags_.items()) {
    os << name << "," << (v.get<bool>() ? 1 : 0) << ",0,flag\n";
  }
  for (const auto& a : assertions_) {
    os << a["name"].get<std::string>() << "," << (a["pass"].get<bool>() ? 1 : 0)
       << ",0,assertion\n";
  }
  if (wall_time_ >= 0.0) os << "wall_time_s," << wall_time_ << ",0,timing\n";
  return os.str();
}

std::string Report::render(std::string_view format) const {
  if (format == "csv") return to_csv();
  return to_json().dump(2) + "\n";
}

}  // namespace ruelle
