#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ruelle/convexity.hpp"
#include "ruelle/paths.hpp"
#include "ruelle/region.hpp"

namespace ruelle {

// Insertion-ordered so that dumps are byte-stable.
using Json = nlohmann::ordered_json;

// Matrices are arrays of rows.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

// {"n": n, "samples": [[t, matrix], ...]}
Json path_to_json(const SymplecticPath& path);
SymplecticPath path_from_json(const Json& j);

// {"n": 2, "kind": "pfamily", "widths": [1, 2], "p": 0.5}. Profiles store
// their values flat in lattice order together with the lattice indices;
// unions nest their two children.
Json region_to_json(const MomentRegion& region);
MomentRegion region_from_json(const Json& j);

// Inline JSON when the text starts with '{', otherwise a file path. Throws
// SpecParseError.
Json load_json(std::string_view text_or_path);
MomentRegion load_region(std::string_view text_or_path);

Json counterexample_to_json(const CounterexampleSpec& spec);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Writes to a sibling temporary file and renames it over path.
void write_atomic(const std::string& path, const std::string& content);

// Columns u_1..u_n, R, x_1..x_n on a simplex direction lattice.
void write_profile_csv(const MomentRegion& region, int resolution,
                       std::ostream& os);

enum class Provenance {
  ClosedForm,
  Quadrature,
  MonteCarlo,
  CertifiedBound,
  Optimization,  // minimum over a grid refined by local search
  Exact,         // counts and integer results
};

std::string_view to_string(Provenance p);

// Command output. Every number sits in a quantity record with its
// provenance; assertions are pass/fail with an optional detail line.
class Report {
 public:
  Report(std::string command, Json config);

  void quantity(const std::string& name, double value, Provenance p,
                double error = 0.0);
  void quantity(const std::string& name, long value);
  void flag(const std::string& name, bool value);
  void attach(const std::string& name, Json value);
  void assertion(const std::string& name, bool pass,
                 const std::string& detail = "");
  void set_wall_time(double seconds) { wall_time_ = seconds; }

  bool passed() const;
  Json to_json() const;
  // name,value,error,provenance rows; flags and assertions as 0/1.
  std::string to_csv() const;
  std::string render(std::string_view format) const;

 private:
  std::string command_;
  Json config_;
  Json quantities_ = Json::object();
  Json flags_ = Json::object();
  Json attachments_ = Json::object();
  Json assertions_ = Json::array();
  double wall_time_ = -1.0;
};

}  // namespace ruelle
