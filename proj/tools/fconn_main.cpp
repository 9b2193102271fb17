#include "fconn/io.hpp"
#include "fconn/verify.hpp"
#include "CLI11.hpp"
#include <fstream>
#include <iostream>

using namespace fconn;

namespace {

// exit-code vocabulary: 2 parse, 3 insufficient precision, 4 field too
// small, 5 undecidable; anything else unexpected is 1

void emit(const Json& report, const std::string& out_path) {
    std::string text = dump_json(report);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream o(out_path);
        if (!o) throw ParseError("cannot write " + out_path);
        o << text;
    }
}

Json input_echo(const ConnectionFile& cf) {
    Json j;
    j["field"] = field_json(cf.F);
    j["group"] = group_json(cf.ctx);
    j["ramification"] = cf.ramification;
    j["precision"] = rat_json(cf.A.prec());
    return j;
}

ConnectionFile load(const std::string& path, const std::string& precision, long degree_cap) {
    ConnectionFile cf = load_connection(path, degree_cap);
    if (!precision.empty()) {
        Json p;
        try {
            p = Json::parse(precision);
        } catch (const std::exception&) {
            throw ParseError("--precision must be an integer or {\"num\":..,\"den\":..}");
        }
        cf.A = cf.A.truncated(rat_from_json(p));
    }
    return cf;
}

Json reduce_report(const ConnectionFile& cf, const ReductionResult& rr, bool trace) {
    Json rep;
    rep["command"] = "reduce";
    rep["input"] = input_echo(cf);
    rep["canonical"] = canonical_json(rr.canonical);
    rep["certificate"] = cert_json(rr.certificate);
    rep["series"] = series_json(rr.series);
    if (trace) rep["trace"] = trace_json(rr.trace);
    Json bounds;
    bounds["used_ramification"] = lcm_long(rr.used_ramification, rr.residue_ram);
    bounds["permitted_ramification"] = int_json(ramification_bound(cf.ctx));
    rep["bounds"] = bounds;
    return rep;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"exact reduction of formal connections to canonical form"};
    app.require_subcommand(1);

    std::string file_a, file_b, cert_path, out_path, precision, over = "F";
    long degree_cap = 0, lift_factor = 1;
    bool trace = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--precision", precision, "override the precision window");
        cmd->add_option("--degree-cap", degree_cap, "override the field degree cap");
        cmd->add_option("-o,--out", out_path, "write the report to a file instead of stdout");
    };

    auto* c_reduce = app.add_subcommand("reduce", "reduce a connection to canonical form");
    c_reduce->add_option("file", file_a)->required();
    c_reduce->add_flag("--trace", trace, "include the reduction trace in the report");
    add_common(c_reduce);

    auto* c_inv = app.add_subcommand("invariants", "monodromy invariants of a regular connection");
    c_inv->add_option("file", file_a)->required();
    add_common(c_inv);

    auto* c_equiv = app.add_subcommand("equiv", "decide gauge equivalence of two connections");
    c_equiv->add_option("file_a", file_a)->required();
    c_equiv->add_option("file_b", file_b)->required();
    c_equiv->add_option("--over", over, "F (base field) or Fbar (algebraic closure)")
        ->check(CLI::IsMember({"F", "Fbar"}));
    add_common(c_equiv);

    auto* c_apply = app.add_subcommand("apply", "apply a gauge certificate to a connection");
    c_apply->add_option("file", file_a)->required();
    c_apply->add_option("--cert", cert_path)->required();
    add_common(c_apply);

    auto* c_verify = app.add_subcommand("verify", "check that a certificate maps one connection to another");
    c_verify->add_option("file_a", file_a)->required();
    c_verify->add_option("file_b", file_b)->required();
    c_verify->add_option("--cert", cert_path)->required();
    add_common(c_verify);

    auto* c_bounds = app.add_subcommand("bounds", "ramification bounds and determinacy windows");
    c_bounds->add_option("file", file_a)->required();
    add_common(c_bounds);

    auto* c_lift = app.add_subcommand("lift", "rewrite through the cover t = u^b");
    c_lift->add_option("file", file_a)->required();
    c_lift->add_option("--factor", lift_factor, "cover order b")->required();
    add_common(c_lift);

    CLI11_PARSE(app, argc, argv);

    if (c_reduce->parsed()) {
        ConnectionFile cf = load(file_a, precision, degree_cap);
        ReductionResult rr = reduce(cf.A, cf.ctx);
        if (!verify_equivalence(cf.A, rr.series, rr.certificate))
            throw Error("internal verification of the certificate failed");
        Json rep = reduce_report(cf, rr, trace);
        rep["verified"] = true;
        emit(rep, out_path);
    } else if (c_inv->parsed()) {
        ConnectionFile cf = load(file_a, precision, degree_cap);
        MonodromyInvariant inv = regular_invariants(cf.A, cf.ctx);
        Json rep;
        rep["command"] = "invariants";
        rep["input"] = input_echo(cf);
        rep["invariants"] = invariant_json(inv);
        emit(rep, out_path);
    } else if (c_equiv->parsed()) {
        ConnectionFile a = load(file_a, precision, degree_cap);
        ConnectionFile b = load(file_b, precision, degree_cap);
        if (a.ctx.str() != b.ctx.str())
            throw ParseError("the two connection files use different groups");
        EquivalenceReport er = equivalent(a.A, b.A, a.ctx, over == "Fbar");
        Json rep;
        rep["command"] = "equiv";
        rep["over"] = over;
        rep["equivalent"] = er.equivalent;
        rep["reason"] = er.reason;
        if (er.witness) {
            rep["witness"] = cert_json(*er.witness);
            if (er.witness_window) rep["witness_window"] = rat_json(*er.witness_window);
            bool full = false;
            try {
                full = verify_equivalence(a.A, b.A, *er.witness);
            } catch (const Error&) {
            }
            rep["witness_verified"] = full; // exact on the whole shared window
        }
        emit(rep, out_path);
    } else if (c_apply->parsed()) {
        ConnectionFile cf = load(file_a, precision, degree_cap);
        GaugeCert cert = cert_from_json(cf.F, read_json_file(cert_path));
        MatSeries out = apply_gauge(cert, cf.A);
        Json rep;
        rep["command"] = "apply";
        rep["result"] = series_json(out);
        emit(rep, out_path);
    } else if (c_verify->parsed()) {
        ConnectionFile a = load(file_a, precision, degree_cap);
        ConnectionFile b = load(file_b, precision, degree_cap);
        GaugeCert cert = cert_from_json(a.F, read_json_file(cert_path));
        MatSeries got = apply_gauge(cert, a.A);
        MatSeries diff = got - b.A.with_ram(got.ram());
        Json rep;
        rep["command"] = "verify";
        bool ok = diff.is_zero();
        rep["verified"] = ok;
        if (!ok) {
            Rat at = *diff.val();
            rep["first_discrepancy"] = Json{{"exponent", rat_json(at)},
                                            {"difference", mat_json(diff.coeff(at))}};
        }
        emit(rep, out_path);
        return ok ? 0 : 1;
    } else if (c_bounds->parsed()) {
        ConnectionFile cf = load(file_a, precision, degree_cap);
        Json rep;
        rep["command"] = "bounds";
        rep["input"] = input_echo(cf);
        rep["ramification_bound"] = int_json(ramification_bound(cf.ctx));
        rep["regular_ramification_bound"] = int_json(regular_ramification_bound(cf.ctx));
        Rat r = cf.A.val().value_or(Rat(-1));
        Json win;
        win["order"] = rat_json(r);
        win["regular"] = rat_json(determinacy_window(cf.ctx, r, WindowKind::Regular));
        try {
            // only meaningful when the context is nilpotent
            win["unipotent"] = rat_json(determinacy_window(cf.ctx, r, WindowKind::Unipotent));
        } catch (const ParseError&) {}
        win["solvable"] = rat_json(determinacy_window(cf.ctx, r, WindowKind::Solvable));
        win["irregular"] = rat_json(determinacy_window(cf.ctx, r, WindowKind::Irregular));
        rep["determinacy_windows"] = win;
        emit(rep, out_path);
    } else if (c_lift->parsed()) {
        ConnectionFile cf = load(file_a, precision, degree_cap);
        if (lift_factor < 1) throw ParseError("cover order must be positive");
        Json rep;
        rep["command"] = "lift";
        rep["factor"] = lift_factor;
        rep["result"] = series_json(b_lift(cf.A, lift_factor));
        emit(rep, out_path);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const InsufficientPrecision& e) {
        std::cerr << e.what() << "\n";
        if (!e.required.empty())
            std::cerr << "required window: coefficients up to exponent " << e.required << "\n";
        return 3;
    } catch (const FieldTooSmall& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const Undecidable& e) {
        std::cerr << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}
