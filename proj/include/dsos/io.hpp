#pragma once

// Text formats: polynomial / POP / certificate JSON, DIMACS edge lists,
// partition lists and the plain-text conic listing written by dump().

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsos/apps.hpp"
#include "dsos/conic.hpp"
#include "dsos/gram.hpp"
#include "dsos/polya.hpp"
#include "dsos/poly.hpp"

#include "json.hpp"

namespace dsos::io {

// Malformed input. line is 1-based; 0 when no line applies.
class ParseError : public std::invalid_argument {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// {"nvars": n, "terms": [[[e1, ..., en], coeff], ...]}, graded-lex order.
nlohmann::json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& j);

// {"objective": <polynomial>, "constraints": [<polynomial>...], "radius": R}.
polya::PopInstance pop_from_json(const nlohmann::json& j);
nlohmann::json to_json(const polya::PopInstance& pop);

// {"basis": {"kind", "nvars", "degree", "exponents"}, "U", "Q", "cone_tag"}.
nlohmann::json to_json(const GramCertificate& c);
GramCertificate certificate_from_json(const nlohmann::json& j);

// Parses text as JSON; syntax errors become ParseError with the line number.
nlohmann::json parse_json(const std::string& text);
std::string read_file(const std::string& path);

// "c" comments, one "p edge N M" header, then M lines "e i j" (1-indexed).
apps::Graph read_dimacs(std::istream& in);
void write_dimacs(const apps::Graph& g, std::ostream& out);

// Whitespace-separated positive integers.
std::vector<int> read_partition(std::istream& in);

// Every program in a dump() listing, in order; "program k" separators
// written by set_dump_path are skipped.
std::vector<ConeProgram> read_conic_listing(std::istream& in);

}  // namespace dsos::io
