#pragma once

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "jetmatch.hpp"

namespace stackeljet {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

inline Rational rational_from_json(const json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_float()) return Rational(j.get<double>());
    throw ConfigError("expected a rational ('p/q' string or integer)");
}

// System descriptor:
//   {"n": int, "m": [m_deg..m_0 as "p/q"], "lambda": "inf"|"p/q", "N": int,
//    "c_tail": [r coefficients, highest first], "d": "symbolic"|[values]}
struct SystemDescriptor {
    BKMData data;
    CPolyForm cform;

    static SystemDescriptor from_json(const json& j) {
        reject_unknown_keys(j, {"n", "m", "lambda", "N", "c_tail", "d"}, "system descriptor");
        SystemDescriptor out;
        if (!j.contains("n") || !j.contains("m") || !j.contains("N"))
            throw ConfigError("system descriptor: required keys n, m, N");
        out.data.n = j.at("n").get<int>();
        if (out.data.n < 1) throw ConfigError("system descriptor: n must be positive");
        std::vector<Rational> mc;
        for (const auto& x : j.at("m")) mc.push_back(rational_from_json(x));
        if (mc.empty() || static_cast<int>(mc.size()) > out.data.n + 1)
            throw ConfigError("system descriptor: m must have degree <= n");
        std::vector<RationalExpr> asc;
        for (auto it = mc.rbegin(); it != mc.rend(); ++it) asc.push_back(RationalExpr(*it));
        out.data.m = SpectralPoly(std::move(asc));
        if (out.data.m.is_zero()) throw ConfigError("system descriptor: m must be nonzero");
        if (j.contains("lambda")) {
            const auto& l = j.at("lambda");
            if (!(l.is_string() && l.get<std::string>() == "inf"))
                out.data.lambda = rational_from_json(l);
        }
        int N = j.at("N").get<int>();
        if (N < 1) throw ConfigError("system descriptor: N must be positive");
        out.cform = CPolyForm::symbolic_d(N);
        if (j.contains("d")) {
            const auto& d = j.at("d");
            if (d.is_string()) {
                if (d.get<std::string>() != "symbolic")
                    throw ConfigError("system descriptor: d must be \"symbolic\" or an array");
            } else {
                out.cform.d.clear();
                for (const auto& x : d) out.cform.d.push_back(RationalExpr(rational_from_json(x)));
                if (static_cast<int>(out.cform.d.size()) != N)
                    throw ConfigError("system descriptor: d must have N entries");
            }
        }
        if (j.contains("c_tail")) {
            std::vector<Rational> rc;
            for (const auto& x : j.at("c_tail")) rc.push_back(rational_from_json(x));
            int degm = out.data.m.degree();
            if (static_cast<int>(rc.size()) > degm)
                throw ConfigError("system descriptor: c_tail must have fewer than deg(m)+1 entries");
            std::vector<RationalExpr> asc2;
            for (auto it = rc.rbegin(); it != rc.rend(); ++it) asc2.push_back(RationalExpr(*it));
            out.cform.r = SpectralPoly(std::move(asc2));
        } else if (out.data.m.degree() == 1) {
            // CH-family default: symbolic trailing constant c_{2N+1}
            out.cform.r = SpectralPoly(RationalExpr(MultiPoly::variable(cvar(2 * N + 1))));
        }
        return out;
    }

    static SystemDescriptor from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open system descriptor: " + path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("invalid JSON in " + path + ": " + e.what());
        }
        return from_json(j);
    }

    json to_json() const {
        json j;
        j["n"] = data.n;
        json m = json::array();
        for (int k = data.m.degree(); k >= 0; --k)
            m.push_back(to_string(data.m.coeff(k).constant_value()));
        j["m"] = m;
        j["lambda"] = data.lambda ? json(to_string(*data.lambda)) : json("inf");
        j["N"] = cform.N;
        return j;
    }
};

// Jet I/O: {"basepoint": "p/q", "order": k,
//           "components": [[derivatives of u_1], [derivatives of u_2], ...]}
inline JetPoint jet_from_json(const json& j) {
    reject_unknown_keys(j, {"basepoint", "order", "components"}, "jet");
    JetPoint out;
    out.basepoint = j.contains("basepoint") ? rational_from_json(j.at("basepoint")) : Rational(0);
    if (!j.contains("components")) throw ConfigError("jet: missing components");
    for (const auto& comp : j.at("components")) {
        std::vector<Rational> vals;
        for (const auto& x : comp) vals.push_back(rational_from_json(x));
        out.values.push_back(std::move(vals));
    }
    if (out.values.empty() || out.values[0].empty()) throw ConfigError("jet: empty");
    for (const auto& c : out.values)
        if (c.size() != out.values[0].size())
            throw ConfigError("jet: components must share one order");
    if (j.contains("order") && j.at("order").get<int>() != out.order())
        throw ConfigError("jet: order key disagrees with component length");
    return out;
}

inline json jet_to_json(const JetPoint& p) {
    json j;
    j["basepoint"] = to_string(p.basepoint);
    j["order"] = p.order();
    json comps = json::array();
    for (const auto& c : p.values) {
        json one = json::array();
        for (const auto& x : c) one.push_back(to_string(x));
        comps.push_back(one);
    }
    j["components"] = comps;
    return j;
}

inline std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline json match_result_to_json(const MatchResult& r) {
    json j;
    j["N"] = r.N;
    j["exact"] = r.exact;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    auto vec = [](const auto& v, auto f) {
        json a = json::array();
        for (const auto& x : v) a.push_back(f(x));
        return a;
    };
    if (r.exact) {
        j["w0"] = vec(r.w0, [](const Rational& q) { return to_string(q); });
        j["p0"] = vec(r.p0, [](const Rational& q) { return to_string(q); });
        j["d"] = vec(r.d, [](const Rational& q) { return to_string(q); });
    } else {
        j["w0"] = vec(r.w0d, [](double x) { return fmt17(x); });
        j["p0"] = vec(r.p0d, [](double x) { return fmt17(x); });
        j["d"] = vec(r.dd, [](double x) { return fmt17(x); });
    }
    if (r.c_top != 0) j["c_top"] = to_string(r.c_top);
    if (r.lambda0 != 0 || r.scale_a != 1.0) {
        j["lambda0"] = to_string(r.lambda0);
        j["scale_a"] = fmt17(r.scale_a);
        j["v0"] = vec(r.v0d, [](double x) { return fmt17(x); });
    }
    return j;
}

// --- canonical fixture text ---

inline std::string taylor_table_text(const JetTable& jt, VarId component, int order,
                                     const std::string& label) {
    std::ostringstream os;
    os << "# taylor " << label << " component " << var_name(component) << " order " << order
       << "\n";
    auto coeffs = jt.taylor_coeffs(component, order);
    for (int j = 0; j <= order; ++j) os << "x^" << j << ": " << coeffs[size_t(j)].str() << "\n";
    return os.str();
}

inline std::string matrix_text(const std::vector<std::vector<RationalExpr>>& M,
                               const std::string& header) {
    std::ostringstream os;
    os << "# " << header << "\n";
    for (const auto& row : M) {
        for (size_t j = 0; j < row.size(); ++j) os << (j ? " | " : "") << row[j].str();
        os << "\n";
    }
    return os.str();
}

inline std::string trajectory_csv(const Trajectory& tr, int N, int n,
                                  const std::vector<std::vector<double>>* u = nullptr,
                                  const std::vector<double>* q = nullptr) {
    std::ostringstream os;
    os << "x";
    for (int i = 1; i <= N; ++i) os << ",w_" << i;
    for (int i = 1; i <= N; ++i) os << ",p_" << i;
    for (int i = 1; i <= N; ++i) os << ",H_" << i;
    if (u)
        for (int c = 1; c <= n; ++c) os << ",u_" << c;
    if (q) os << ",q";
    os << "\n";
    for (size_t s = 0; s < tr.x.size(); ++s) {
        os << fmt17(tr.x[s]);
        for (double v : tr.state[s]) os << "," << fmt17(v);
        for (double v : tr.H[s]) os << "," << fmt17(v);
        if (u)
            for (int c = 0; c < n; ++c) os << "," << fmt17((*u)[size_t(c)][s]);
        if (q) os << "," << fmt17((*q)[s]);
        os << "\n";
    }
    return os.str();
}

inline std::string field_csv(const FieldSample& f, int N, int n) {
    std::ostringstream os;
    os << "x,t";
    for (int i = 1; i <= N; ++i) os << ",w_" << i;
    for (int i = 1; i <= N; ++i) os << ",p_" << i;
    for (int c = 1; c <= n; ++c) os << ",u_" << c;
    os << ",q\n";
    for (size_t it = 0; it < f.t.size(); ++it)
        for (size_t ix = 0; ix < f.x.size(); ++ix) {
            os << fmt17(f.x[ix]) << "," << fmt17(f.t[it]);
            for (double v : f.state[it][ix]) os << "," << fmt17(v);
            for (int c = 0; c < n; ++c) os << "," << fmt17(f.u[size_t(c)][it][ix]);
            os << "," << fmt17(f.q[it][ix]) << "\n";
        }
    return os.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

} // namespace stackeljet
