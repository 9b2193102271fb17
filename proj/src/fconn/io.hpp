#pragma once
#include "fconn/galois.hpp"
#include "json.hpp"
#include <string>

namespace fconn {

// All file I/O is JSON with exact rationals as {"num":…,"den":…} objects
// (decimal strings when a value does not fit a JSON integer) — no floats.
// Reports use insertion-ordered objects so identical inputs give identical
// bytes.
using Json = nlohmann::ordered_json;

struct ConnectionFile {
    FieldPtr F;
    GroupContext ctx;
    long ramification = 1;
    MatSeries A;
};

Json int_json(const Int& v);
Int int_from_json(const Json& j);
Json rat_json(const Rat& q);
Rat rat_from_json(const Json& j);
Json scalar_json(const Scalar& s);
Scalar scalar_from_json(const FieldPtr& F, const Json& j);
Json mat_json(const Mat& m);
Mat mat_from_json(const FieldPtr& F, const Json& j);
Json field_json(const FieldPtr& F);
FieldPtr field_from_json(const Json& j, long degree_cap = 0);
Json group_json(const GroupContext& ctx);
GroupContext group_from_json(const Json& j);
Json series_json(const MatSeries& s);
Json cert_json(const GaugeCert& c);
GaugeCert cert_from_json(const FieldPtr& F, const Json& j);
Json canonical_json(const CanonicalForm& cf);
Json trace_json(const ReductionTrace& tr);
Json invariant_json(const MonodromyInvariant& inv);

// parse and validate a connection file: exponents distinct and below the
// precision, denominators dividing the declared ramification, coefficients
// inside Lie(group)
ConnectionFile parse_connection(const Json& j, long degree_cap = 0);
ConnectionFile load_connection(const std::string& path, long degree_cap = 0);

Json read_json_file(const std::string& path);
std::string dump_json(const Json& j); // stable two-space formatting

} // namespace fconn
