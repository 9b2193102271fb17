#include "fconn/io.hpp"
#include <fstream>
#include <limits>

namespace fconn {

namespace {

const Json& need(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw ParseError(std::string("missing field '") + key + "'");
    return j.at(key);
}

long long_of(const Json& j, const char* what) {
    if (!j.is_number_integer()) throw ParseError(std::string(what) + " must be an integer");
    return j.get<long>();
}

} // namespace

Json int_json(const Int& v) {
    static const Int lo = Int(std::numeric_limits<long long>::min());
    static const Int hi = Int(std::numeric_limits<long long>::max());
    if (lo <= v && v <= hi) return v.convert_to<long long>();
    return v.str();
}

Int int_from_json(const Json& j) {
    if (j.is_number_integer()) return Int(j.get<long long>());
    if (j.is_string()) return Int(j.get<std::string>());
    throw ParseError("expected an integer (number or decimal string)");
}

Json rat_json(const Rat& q) {
    Json j;
    j["num"] = int_json(rat_num(q));
    j["den"] = int_json(rat_den(q));
    return j;
}

Rat rat_from_json(const Json& j) {
    if (j.is_number_integer()) return Rat(Int(j.get<long long>()));
    Int den = j.contains("den") ? int_from_json(j.at("den")) : Int(1);
    if (den == 0) throw ParseError("rational with zero denominator");
    return Rat(int_from_json(need(j, "num")), den);
}

Json scalar_json(const Scalar& s) {
    if (s.is_rational()) return rat_json(s.as_rat());
    Json rows = Json::array();
    for (auto& theta_row : s.coords()) {
        Json r = Json::array();
        for (auto& q : theta_row) r.push_back(rat_json(q));
        rows.push_back(r);
    }
    Json j;
    j["coords"] = rows;
    return j;
}

Scalar scalar_from_json(const FieldPtr& F, const Json& j) {
    if (j.is_object() && j.contains("coords")) {
        std::vector<std::vector<Rat>> coords;
        for (auto& row : j.at("coords")) {
            std::vector<Rat> r;
            for (auto& q : row) r.push_back(rat_from_json(q));
            coords.push_back(r);
        }
        return Scalar::from_coords(F, coords);
    }
    return Scalar::of(F, rat_from_json(j));
}

Json mat_json(const Mat& m) {
    Json rows = Json::array();
    for (long i = 0; i < m.rows(); ++i) {
        Json r = Json::array();
        for (long j = 0; j < m.cols(); ++j) r.push_back(scalar_json(m.at(i, j)));
        rows.push_back(r);
    }
    return rows;
}

Mat mat_from_json(const FieldPtr& F, const Json& j) {
    if (!j.is_array() || j.empty()) throw ParseError("matrix must be a non-empty array of rows");
    std::vector<std::vector<Scalar>> rows;
    for (auto& r : j) {
        std::vector<Scalar> row;
        for (auto& e : r) row.push_back(scalar_from_json(F, e));
        rows.push_back(row);
    }
    for (auto& r : rows)
        if (r.size() != rows[0].size()) throw ParseError("ragged matrix rows");
    return Mat::from_rows(F, rows);
}

Json field_json(const FieldPtr& F) {
    Json j;
    j["cyclotomic_order"] = F->n;
    if (F->has_ext()) {
        Json mp = Json::array();
        for (auto& row : F->ext) {
            Json r = Json::array();
            for (auto& q : row) r.push_back(rat_json(q));
            mp.push_back(r);
        }
        j["minpoly"] = mp;
    }
    j["degree_cap"] = F->degree_cap;
    return j;
}

FieldPtr field_from_json(const Json& j, long degree_cap) {
    long n = 1;
    long cap = 64;
    if (j.is_object()) {
        if (j.contains("cyclotomic_order")) n = long_of(j.at("cyclotomic_order"), "cyclotomic_order");
        if (j.contains("degree_cap")) cap = long_of(j.at("degree_cap"), "degree_cap");
    }
    if (degree_cap > 0) cap = degree_cap;
    if (n < 1) throw ParseError("cyclotomic order must be positive");
    if (j.is_object() && j.contains("minpoly") && !j.at("minpoly").empty()) {
        const Json& mp = j.at("minpoly");
        // accept either a flat rational list (minpoly over Q) or coordinate rows
        std::vector<Rat> coeffs;
        for (auto& e : mp) {
            if (e.is_array()) {
                if (e.size() != 1 || !e.at(0).is_array())
                    throw ParseError("extension minpoly must have rational coefficients");
                coeffs.push_back(rat_from_json(e.at(0).at(0)));
            } else {
                coeffs.push_back(rat_from_json(e));
            }
        }
        return Field::make_ext(n, coeffs, cap);
    }
    return Field::make(n, cap);
}

Json group_json(const GroupContext& ctx) {
    Json j;
    switch (ctx.kind) {
        case GroupKind::GL: j["kind"] = "gl"; break;
        case GroupKind::SL: j["kind"] = "sl"; break;
        case GroupKind::DiagTorus: j["kind"] = "torus"; break;
        case GroupKind::UpperTriangular: j["kind"] = "borel"; break;
        case GroupKind::StrictUpper: j["kind"] = "strict_upper"; break;
        case GroupKind::LeviProduct: j["kind"] = "levi"; break;
    }
    if (ctx.kind == GroupKind::LeviProduct) {
        Json fs = Json::array();
        for (auto& f : ctx.factors) fs.push_back(group_json(f));
        j["factors"] = fs;
        j["radical"] = ctx.radical;
    } else {
        j["n"] = ctx.n;
    }
    return j;
}

GroupContext group_from_json(const Json& j) {
    std::string kind = need(j, "kind").get<std::string>();
    if (kind == "levi") {
        std::vector<GroupContext> fs;
        for (auto& f : need(j, "factors")) fs.push_back(group_from_json(f));
        bool radical = j.contains("radical") && j.at("radical").get<bool>();
        return GroupContext::levi(fs, radical);
    }
    long n = long_of(need(j, "n"), "group size");
    if (n < 1) throw ParseError("group size must be positive");
    if (kind == "gl") return GroupContext::gl(n);
    if (kind == "sl") return GroupContext::sl(n);
    if (kind == "torus") return GroupContext::diag_torus(n);
    if (kind == "borel") return GroupContext::upper_triangular(n);
    if (kind == "strict_upper") return GroupContext::strict_upper(n);
    throw ParseError("unknown group kind '" + kind + "'");
}

Json series_json(const MatSeries& s) {
    Json j;
    j["ramification"] = s.ram();
    j["precision"] = rat_json(s.prec());
    Json terms = Json::array();
    for (const Rat& q : s.support()) {
        Json t;
        t["num"] = int_json(rat_num(q));
        t["den"] = int_json(rat_den(q));
        t["matrix"] = mat_json(s.coeff(q));
        terms.push_back(t);
    }
    j["terms"] = terms;
    return j;
}

Json cert_json(const GaugeCert& c) {
    Json atoms = Json::array();
    for (auto& a : c.atoms) {
        Json t;
        if (auto* e = std::get_if<ExpAtom>(&a)) {
            t["type"] = "exp";
            t["q"] = rat_json(e->q);
            t["X"] = mat_json(e->X);
        } else if (auto* s = std::get_if<ShearAtom>(&a)) {
            t["type"] = "shear";
            Json lam = Json::array();
            for (auto& l : s->lam) lam.push_back(int_json(l));
            t["lam"] = lam;
            t["den"] = s->den;
        } else if (auto* g = std::get_if<ConstAtom>(&a)) {
            t["type"] = "const";
            t["g"] = mat_json(g->g);
        } else {
            t["type"] = "ramify";
            t["c"] = std::get<RamifyAtom>(a).c;
        }
        atoms.push_back(t);
    }
    Json j;
    j["atoms"] = atoms;
    return j;
}

GaugeCert cert_from_json(const FieldPtr& F, const Json& j) {
    GaugeCert c;
    for (auto& t : need(j, "atoms")) {
        std::string type = need(t, "type").get<std::string>();
        if (type == "exp")
            c.atoms.push_back(ExpAtom{mat_from_json(F, need(t, "X")), rat_from_json(need(t, "q"))});
        else if (type == "shear") {
            ShearAtom s;
            for (auto& l : need(t, "lam")) s.lam.push_back(int_from_json(l));
            s.den = long_of(need(t, "den"), "shear denominator");
            c.atoms.push_back(s);
        } else if (type == "const")
            c.atoms.push_back(ConstAtom{mat_from_json(F, need(t, "g"))});
        else if (type == "ramify")
            c.atoms.push_back(RamifyAtom{long_of(need(t, "c"), "ramify factor")});
        else
            throw ParseError("unknown atom type '" + type + "'");
    }
    return c;
}

Json canonical_json(const CanonicalForm& cf) {
    Json j;
    j["ramification"] = cf.ram;
    Json lv = Json::array();
    for (auto& r : cf.levels) lv.push_back(rat_json(r));
    j["levels"] = lv;
    Json co = Json::array();
    for (auto& m : cf.irr_coeffs) co.push_back(mat_json(m));
    j["coefficients"] = co;
    j["residue"] = mat_json(cf.residue);
    j["normalized"] = cf.normalized;
    return j;
}

Json trace_json(const ReductionTrace& tr) {
    Json j;
    j["steps"] = tr.steps;
    Json dl = Json::array(), lm = Json::array(), od = Json::array();
    for (auto& d : tr.deltas) dl.push_back(rat_json(d));
    for (auto& l : tr.lambdas) lm.push_back(rat_json(l));
    for (long o : tr.orbit_dims) od.push_back(o);
    j["deltas"] = dl;
    j["lambdas"] = lm;
    j["orbit_dims"] = od;
    j["shearing_steps"] = tr.c2_steps;
    return j;
}

Json invariant_json(const MonodromyInvariant& inv) {
    Json classes = Json::array();
    for (size_t i = 0; i < inv.v.size(); ++i) {
        Json c;
        c["class"] = scalar_json(inv.v[i].first);
        c["multiplicity"] = inv.v[i].second;
        c["orbit"] = inv.orbit[i];
        classes.push_back(c);
    }
    Json j;
    j["classes"] = classes;
    return j;
}

ConnectionFile parse_connection(const Json& j, long degree_cap) {
    ConnectionFile cf;
    cf.F = field_from_json(j.contains("field") ? j.at("field") : Json::object(), degree_cap);
    cf.ctx = group_from_json(need(j, "group"));
    cf.ramification = j.contains("ramification") ? long_of(j.at("ramification"), "ramification") : 1;
    if (cf.ramification < 1) throw ParseError("ramification must be positive");
    Rat prec = rat_from_json(need(j, "precision"));
    MatSeries A(cf.F, cf.ctx.size(), cf.ramification, prec);
    std::vector<Rat> seen;
    for (auto& t : need(j, "terms")) {
        Rat num(int_from_json(need(t, "num")));
        Int den = t.contains("den") ? int_from_json(t.at("den")) : Int(1);
        if (den <= 0) throw ParseError("term denominator must be positive");
        Rat e = num / den;
        if (!is_integer(Rat(cf.ramification) / rat_den(e)))
            throw ParseError("term exponent " + rat_str(e)
                             + " does not live on the declared ramification grid");
        if (!(e < prec))
            throw ParseError("term exponent " + rat_str(e) + " at or above the precision window");
        for (auto& s : seen)
            if (s == e) throw ParseError("duplicate term exponent " + rat_str(e));
        seen.push_back(e);
        Mat m = mat_from_json(cf.F, need(t, "matrix"));
        if (m.rows() != cf.ctx.size() || m.cols() != cf.ctx.size())
            throw ParseError("term matrix size does not match the group");
        if (!cf.ctx.lie_contains(m))
            throw ParseError("term at exponent " + rat_str(e)
                             + " is not in the Lie algebra of the group");
        A.set_coeff(e, m);
    }
    cf.A = A;
    return cf;
}

ConnectionFile load_connection(const std::string& path, long degree_cap) {
    return parse_connection(read_json_file(path), degree_cap);
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

} // namespace fconn
