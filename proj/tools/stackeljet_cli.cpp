// Command-line front end: construct reduced systems, print Taylor tables and
// all-0 Jacobians, run the jet matchers, simulate flows, and reproduce the
// committed fixture tables.

#include <CLI11.hpp>
#include <iostream>

#include <stackeljet/stackeljet.hpp>

using namespace stackeljet;

namespace {

struct CommonOpts {
    std::string system_path;
    bool kdv = false, kb = false, ch = false;
    int N = 0;
    std::string format = "text";
    std::string out;
};

void add_system_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--system", o.system_path, "system descriptor JSON file");
    cmd->add_flag("--kdv", o.kdv, "preset: n=1, m = 1");
    cmd->add_flag("--kb", o.kb, "preset: n=2, m = 1");
    cmd->add_flag("--ch", o.ch, "preset: n=1, m = mu");
    cmd->add_option("--N", o.N, "gap number override");
}

SystemDescriptor resolve_system(const CommonOpts& o, int default_N = 2) {
    int N = o.N > 0 ? o.N : default_N;
    if (int(o.kdv) + int(o.kb) + int(o.ch) + int(!o.system_path.empty()) != 1)
        throw ConfigError("specify exactly one of --system/--kdv/--kb/--ch");
    SystemDescriptor d;
    if (o.kdv) {
        d.data = BKMData::kdv_class(1, Rational(1));
        d.cform = CPolyForm::symbolic_d(N);
    } else if (o.kb) {
        d.data = BKMData::kdv_class(2, Rational(1));
        d.cform = CPolyForm::symbolic_d(N);
    } else if (o.ch) {
        d.data = BKMData::ch_class();
        d.cform = CPolyForm::ch(N);
    } else {
        d = SystemDescriptor::from_file(o.system_path);
        if (o.N > 0) {
            d.cform = CPolyForm::symbolic_d(o.N);
            if (d.data.m.degree() == 1)
                d.cform.r = SpectralPoly(RationalExpr(MultiPoly::variable(cvar(2 * o.N + 1))));
        }
    }
    return d;
}

void emit(const CommonOpts& o, const std::string& content) {
    if (o.out.empty())
        std::cout << content;
    else
        write_file(o.out, content);
}

std::vector<double> parse_double_list(const std::string& s) {
    json j = json::parse(s);
    std::vector<double> out;
    for (const auto& x : j)
        out.push_back(x.is_string() ? to_double(parse_rational(x.get<std::string>()))
                                    : x.get<double>());
    return out;
}

std::vector<Rational> parse_rational_list(const std::string& s) {
    json j = json::parse(s);
    std::vector<Rational> out;
    for (const auto& x : j) out.push_back(rational_from_json(x));
    return out;
}

std::string construct_text(const SystemDescriptor& d) {
    StackelSystem sys(d.data, d.cform);
    std::ostringstream os;
    os << "# system n=" << d.data.n << " N=" << sys.N() << " type=" << to_string(d.data.type())
       << " m=" << d.data.m.str() << "\n";
    for (int i = 1; i <= sys.N(); ++i) os << "H_" << i << " = " << sys.hamiltonian(i).str() << "\n";
    for (int i = 1; i <= sys.N(); ++i) os << "(w" << i << ")_x = " << sys.wx(i).str() << "\n";
    for (int i = 1; i <= sys.N(); ++i) os << "(p" << i << ")_x = " << sys.px(i).str() << "\n";
    return os.str();
}

std::string jacobian_text(int N) {
    StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
    JetTable jt(sys);
    auto J = jt.jacobian_all0();
    return matrix_text(J, "jacobian_all0 ch N=" + std::to_string(N));
}

// Appendix-style matrix: rows (X)_{jx}, j = 1..2N-2, columns the partial
// derivatives at all-0 with respect to p_N, w_1, p_{N-1}, w_2, ..., p_1, w_N.
std::string derivative_matrix_text(int N, VarId X) {
    StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
    JetTable jt(sys);
    std::vector<VarId> cols;
    for (int k = 1; k <= N; ++k) {
        cols.push_back(pvar(N + 1 - k));
        cols.push_back(wvar(k));
    }
    int maxj = 2 * N - 2;
    auto chain = jt.truncated_chain(X, maxj, 1, jt.small_vars());
    std::vector<std::vector<RationalExpr>> M;
    for (int j = 1; j <= maxj; ++j) {
        std::vector<RationalExpr> row;
        for (VarId v : cols) row.push_back(jt.eval_all0(chain[size_t(j)].derivative(v)));
        M.push_back(std::move(row));
    }
    std::ostringstream hdr;
    hdr << "derivatives of " << var_name(X) << "_{jx} at all-0, ch N=" << N << ", columns";
    for (VarId v : cols) hdr << " " << var_name(v);
    return matrix_text(M, hdr.str());
}

// Values (X)_{jx}|all-0 for X across w_1..w_{N-1} / p_N..p_2, j = 1..2N-2.
std::string values_matrix_text(int N) {
    StackelSystem sys(BKMData::ch_class(), CPolyForm::ch(N));
    JetTable jt(sys);
    int maxj = 2 * N - 2;
    std::vector<std::vector<RationalExpr>> W, P;
    for (int i = 1; i <= N - 1; ++i) {
        auto cw = jt.truncated_chain(wvar(i), maxj, 0, jt.small_vars());
        auto cp = jt.truncated_chain(pvar(N + 1 - i), maxj, 0, jt.small_vars());
        std::vector<RationalExpr> rw, rp;
        for (int j = 1; j <= maxj; ++j) {
            rw.push_back(jt.eval_all0(cw[size_t(j)]));
            rp.push_back(jt.eval_all0(cp[size_t(j)]));
        }
        W.push_back(std::move(rw));
        P.push_back(std::move(rp));
    }
    std::string out = matrix_text(W, "values (w_i)_{jx} at all-0, ch N=" + std::to_string(N));
    out += matrix_text(P, "values (p_{N+1-i})_{jx} at all-0, ch N=" + std::to_string(N));
    return out;
}

std::string taylor_fixture(const char* name, int n, int N, int order) {
    StackelSystem sys(BKMData::kdv_class(n, Rational(1)), CPolyForm::symbolic_d(N));
    JetTable jt(sys);
    std::string out;
    for (int c = 1; c <= n; ++c)
        out += taylor_table_text(jt, wvar(c), order, std::string(name) + " N=" + std::to_string(N));
    return out;
}

int cmd_reproduce(const std::string& dir, bool regen) {
    struct Item {
        std::string file;
        std::function<std::string()> gen;
    };
    std::vector<Item> items;
    items.push_back({"taylor_kdv_n4.txt", [] { return taylor_fixture("kdv", 1, 4, 3); }});
    items.push_back({"taylor_kdv_n5.txt", [] { return taylor_fixture("kdv", 1, 5, 4); }});
    items.push_back({"taylor_kdv_n6.txt", [] { return taylor_fixture("kdv", 1, 6, 5); }});
    items.push_back({"taylor_kb_n6.txt", [] { return taylor_fixture("kb", 2, 6, 2); }});
    items.push_back({"taylor_kb_n8.txt", [] { return taylor_fixture("kb", 2, 8, 3); }});
    items.push_back({"jacobian_ch_n6.txt", [] { return jacobian_text(6); }});
    items.push_back({"values_all0_ch_n6.txt", [] { return values_matrix_text(6); }});
    for (int i = 1; i <= 5; ++i)
        items.push_back({"prolong_w" + std::to_string(i) + "_ch_n6.txt",
                         [i] { return derivative_matrix_text(6, wvar(i)); }});
    for (int i = 1; i <= 5; ++i)
        items.push_back({"prolong_p" + std::to_string(7 - i) + "_ch_n6.txt",
                         [i] { return derivative_matrix_text(6, pvar(7 - i)); }});
    items.push_back({"hamiltonian_kdv_n4.txt", [] {
                         CommonOpts o;
                         o.kdv = true;
                         o.N = 4;
                         return construct_text(resolve_system(o));
                     }});

    int bad = 0;
    for (const auto& item : items) {
        std::string path = dir + "/" + item.file;
        std::string got = item.gen();
        if (regen) {
            write_file(path, got);
            std::cout << "wrote " << path << "\n";
            continue;
        }
        std::string want;
        try {
            want = read_file(path);
        } catch (const std::exception&) {
            std::cout << "MISSING  " << item.file << "\n";
            ++bad;
            continue;
        }
        if (want == got) {
            std::cout << "ok       " << item.file << "\n";
        } else {
            std::cout << "DIFFERS  " << item.file << "\n";
            ++bad;
        }
    }
    return bad == 0 ? 0 : 1;
}

int run(int argc, char** argv) {
    CLI::App app{"stackeljet: Stackel systems, jet prolongation and finite-gap jet matching"};
    app.require_subcommand(1);
    unsigned seed = 0;
    app.add_option("--seed", seed, "seed for randomized demos");

    CommonOpts con, tay, jac, mat, sim, ver, plo;
    std::string fixtures_dir = "fixtures";
    bool regen = false;

    auto* c_construct =
        app.add_subcommand("construct", "build a system and print H_i and the equations of motion");
    add_system_flags(c_construct, con);
    c_construct->add_option("--format", con.format)->check(CLI::IsMember({"text", "json"}));
    c_construct->add_option("--out", con.out);

    auto* c_taylor = app.add_subcommand("taylor", "print the Taylor table of a component");
    add_system_flags(c_taylor, tay);
    std::string component = "w1";
    int order = 3;
    c_taylor->add_option("--component", component, "component name, e.g. w1");
    c_taylor->add_option("--order", order, "tail order of the table");
    c_taylor->add_option("--out", tay.out);

    auto* c_jac = app.add_subcommand("jacobian", "print the all-0 Jacobian of the CH family");
    add_system_flags(c_jac, jac);
    c_jac->add_option("--out", jac.out);

    auto* c_match = app.add_subcommand("match", "solve the jet-approximation problem");
    add_system_flags(c_match, mat);
    std::string jet_str, jet_file;
    double tol = 1e-9;
    int max_iter = 25;
    c_match->add_option("--jet", jet_str,
                        "target jet: JSON array of derivative values (one component)");
    c_match->add_option("--jet-file", jet_file, "target jet JSON file (multi-component)");
    c_match->add_option("--tol", tol);
    c_match->add_option("--max-iter", max_iter);
    c_match->add_option("--out", mat.out);

    auto* c_sim = app.add_subcommand("simulate", "integrate the joint flow and emit CSV samples");
    add_system_flags(c_sim, sim);
    std::string w0s, p0s;
    std::vector<double> xspan{-1.0, 1.0}, tspan;
    int nx = 41, nt = 9;
    double rel_tol = 1e-10;
    c_sim->add_option("--w0", w0s, "initial w as JSON array")->required();
    c_sim->add_option("--p0", p0s, "initial p as JSON array")->required();
    c_sim->add_option("--xspan", xspan, "x range")->expected(2);
    c_sim->add_option("--tspan", tspan, "t range (omit for a single x-trajectory)")->expected(2);
    c_sim->add_option("--nx", nx);
    c_sim->add_option("--nt", nt);
    c_sim->add_option("--tol", rel_tol);
    c_sim->add_option("--out", sim.out);

    auto* c_verify = app.add_subcommand("verify", "re-prolong a match result and report deviations");
    add_system_flags(c_verify, ver);
    std::string result_file, target_str;
    double vtol = 1e-9;
    c_verify->add_option("--result", result_file, "match result JSON file")->required();
    c_verify->add_option("--jet", target_str, "target jet (same form as match)")->required();
    c_verify->add_option("--tol", vtol);
    c_verify->add_option("--out", ver.out);

    auto* c_rep =
        app.add_subcommand("reproduce-paper", "regenerate all fixture tables and diff them");
    c_rep->add_option("--fixtures", fixtures_dir, "fixture directory");
    c_rep->add_flag("--regen", regen, "rewrite the fixture files instead of diffing");

    auto* c_plot = app.add_subcommand("plot-data", "CSV for the order-3 gaussian-hump demo");
    int plot_order = 3;
    double xmax = 1.5;
    c_plot->add_option("--order", plot_order);
    c_plot->add_option("--xmax", xmax);
    c_plot->add_option("--out", plo.out);

    CLI11_PARSE(app, argc, argv);

    if (c_construct->parsed()) {
        SystemDescriptor d = resolve_system(con);
        if (con.format == "json")
            emit(con, d.to_json().dump(2) + "\n");
        else
            emit(con, construct_text(d));
        return 0;
    }
    if (c_taylor->parsed()) {
        SystemDescriptor d = resolve_system(tay, 4);
        StackelSystem sys(d.data, d.cform);
        JetTable jt(sys);
        emit(tay, taylor_table_text(jt, var(component), order,
                                    "system n=" + std::to_string(d.data.n) + " N=" +
                                        std::to_string(sys.N())));
        return 0;
    }
    if (c_jac->parsed()) {
        if (!jac.ch && jac.system_path.empty())
            throw ConfigError("jacobian: defined for the CH family; pass --ch");
        emit(jac, jacobian_text(jac.N > 0 ? jac.N : 6));
        return 0;
    }
    if (c_match->parsed()) {
        SystemDescriptor d = resolve_system(mat, 2);
        json result;
        if (d.data.deg_m_zero()) {
            std::vector<std::vector<Rational>> target;
            if (!jet_file.empty())
                target = jet_from_json(json::parse(read_file(jet_file))).values;
            else if (!jet_str.empty())
                target.push_back(parse_rational_list(jet_str));
            else
                throw ConfigError("match: --jet or --jet-file required");
            if (static_cast<int>(target.size()) != d.data.n)
                throw ConfigError("match: jet must have n components");
            Rational m0 = d.data.m.coeff(0).constant_value();
            MatchResult r = match_deg_m0(d.data.n, m0, target, mat.N);
            StackelSystem sys(BKMData::kdv_class(d.data.n, m0), CPolyForm::symbolic_d(r.N));
            ReductionMap R = ReductionMap::build(sys);
            std::map<VarId, Rational> consts;
            for (int i = 1; i <= r.N; ++i) consts[dvar(i)] = r.d[size_t(i) - 1];
            auto rep = verify_match(sys, R, r, target, consts);
            r.residual = rep.max_deviation;
            result = match_result_to_json(r);
            result["verified_exact_zero"] = rep.exact_zero;
        } else if (d.data.m.degree() == 1) {
            std::vector<double> target;
            if (!jet_file.empty()) {
                JetPoint p = jet_from_json(json::parse(read_file(jet_file)));
                for (const auto& x : p.values.at(0)) target.push_back(to_double(x));
            } else if (!jet_str.empty()) {
                target = parse_double_list(jet_str);
            } else {
                throw ConfigError("match: --jet or --jet-file required");
            }
            NewtonOptions opt;
            opt.tol = tol;
            opt.max_iter = max_iter;
            Rational m1 = d.data.m.coeff(1).constant_value();
            Rational m0 = d.data.m.coeff(0).constant_value();
            if (m1 == 1 && m0 == 0) {
                MatchResult r = match_ch_newton(target, opt, mat.N);
                result = match_result_to_json(r);
            } else {
                auto gm = match_general_linear_m(m1, m0, target, opt, mat.N);
                result = match_result_to_json(gm.result);
            }
        } else {
            throw ConfigError("match: deg(m) must be 0 or 1");
        }
        emit(mat, result.dump(2) + "\n");
        return 0;
    }
    if (c_sim->parsed()) {
        SystemDescriptor d = resolve_system(sim, 2);
        auto w0 = parse_rational_list(w0s);
        auto p0 = parse_rational_list(p0s);
        StackelSystem sys0(d.data, d.cform);
        StackelSystem placed = sys0.with_d_values(sys0.place_on_zero_level(w0, p0));
        ReductionMap R = ReductionMap::build(placed);
        OdeOptions opt;
        opt.rel_tol = rel_tol;
        opt.abs_tol = rel_tol * 1e-2;
        std::vector<double> w0d, p0d;
        for (auto& q : w0) w0d.push_back(to_double(q));
        for (auto& q : p0) p0d.push_back(to_double(q));
        if (tspan.empty()) {
            Trajectory tr = integrate_x(placed, {}, w0d, p0d, xspan[0], xspan[1], opt);
            emit(sim, trajectory_csv(tr, placed.N(), d.data.n));
        } else {
            std::vector<double> xg, tg;
            for (int i = 0; i < nx; ++i)
                xg.push_back(xspan[0] + (xspan[1] - xspan[0]) * i / (nx - 1));
            for (int i = 0; i < nt; ++i)
                tg.push_back(tspan[0] + (tspan[1] - tspan[0]) * i / (nt - 1));
            FieldSample f = joint_flow(placed, R, {}, w0d, p0d, xg, tg, opt);
            emit(sim, field_csv(f, placed.N(), d.data.n));
        }
        return 0;
    }
    if (c_verify->parsed()) {
        SystemDescriptor d = resolve_system(ver, 2);
        if (!d.data.deg_m_zero())
            throw ConfigError("verify: exact verification covers deg(m)=0 results");
        json rj = json::parse(read_file(result_file));
        std::vector<std::vector<Rational>> target{parse_rational_list(target_str)};
        MatchResult r;
        r.exact = true;
        r.N = rj.at("N").get<int>();
        for (const auto& x : rj.at("w0")) r.w0.push_back(parse_rational(x.get<std::string>()));
        for (const auto& x : rj.at("p0")) r.p0.push_back(parse_rational(x.get<std::string>()));
        for (const auto& x : rj.at("d")) r.d.push_back(parse_rational(x.get<std::string>()));
        Rational m0 = d.data.m.coeff(0).constant_value();
        StackelSystem sys(BKMData::kdv_class(d.data.n, m0), CPolyForm::symbolic_d(r.N));
        ReductionMap R = ReductionMap::build(sys);
        std::map<VarId, Rational> consts;
        for (int i = 1; i <= r.N; ++i) consts[dvar(i)] = r.d[size_t(i) - 1];
        auto rep = verify_match(sys, R, r, target, consts);
        json out;
        out["exact_zero"] = rep.exact_zero;
        out["max_deviation"] = rep.max_deviation;
        json dev = json::array();
        for (const auto& row : rep.deviation) {
            json r2 = json::array();
            for (double x : row) r2.push_back(fmt17(x));
            dev.push_back(r2);
        }
        out["deviation"] = dev;
        emit(ver, out.dump(2) + "\n");
        return rep.exact_zero || rep.max_deviation <= vtol ? 0 : 1;
    }
    if (c_rep->parsed()) return cmd_reproduce(fixtures_dir, regen);
    if (c_plot->parsed()) {
        // approximate exp(-x^2) at 0 to the requested order, integrate, emit
        // x, u(x), exp(-x^2) samples
        std::vector<Rational> derivs{Rational(1), Rational(0)};
        for (int k = 2; k <= plot_order; ++k)
            derivs.push_back(Rational(-2) * (k - 1) * derivs[size_t(k) - 2]);
        derivs.resize(size_t(plot_order) + 1);
        MatchResult r = match_deg_m0(1, Rational(1), {derivs});
        StackelSystem sys(BKMData::kdv_class(1, Rational(1)), CPolyForm::symbolic_d(r.N));
        StackelSystem placed = sys.with_d_values(r.d);
        OdeOptions opt;
        opt.rel_tol = 1e-12;
        opt.abs_tol = 1e-14;
        opt.state_bound = 1e4;
        Trajectory fwd = integrate_x(placed, {}, r.w0d, r.p0d, 0.0, xmax, opt);
        Trajectory bwd = integrate_x(placed, {}, r.w0d, r.p0d, 0.0, -xmax, opt);
        std::ostringstream os;
        os << "x,u,target\n";
        auto emit_row = [&](double x, const std::vector<double>& st) {
            os << fmt17(x) << "," << fmt17(-2.0 * st[0]) << "," << fmt17(std::exp(-x * x)) << "\n";
        };
        for (size_t s = bwd.x.size(); s-- > 1;) emit_row(bwd.x[s], bwd.state[s]);
        for (size_t s = 0; s < fwd.x.size(); ++s) emit_row(fwd.x[s], fwd.state[s]);
        emit(plo, os.str());
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        return e.get_exit_code() == 0 ? 0 : 2;
    } catch (const NoConvergence& e) {
        std::cerr << "no convergence: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
