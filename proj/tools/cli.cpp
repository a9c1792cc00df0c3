#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "jutila/errors.hpp"
#include "jutila/farey.hpp"
#include "jutila/lfunction.hpp"
#include "jutila/parallel.hpp"
#include "jutila/sieve.hpp"
#include "jutila/statphase.hpp"
#include "jutila/voronoi.hpp"

namespace jutila::cli {

namespace {

constexpr const char* VERSION = "0.1.0";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct Output {
    std::string path = "-";
    std::string format = "csv";  // csv | json
    std::ostringstream buf;

    void header(const std::map<std::string, std::string>& config) {
        std::string canon;
        for (const auto& [k, v] : config) canon += k + "=" + v + "\n";
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)fnv1a(canon));
        if (format == "csv") buf << "# jutila-lab v" << VERSION << ", config-hash=" << hex << "\n";
    }
    void flush(std::ostream& out) {
        if (path == "-") {
            out << buf.str();
        } else {
            std::ofstream f(path, std::ios::binary);
            if (!f) throw ValidationError("cannot open output file: " + path);
            f << buf.str();
        }
    }
};

// flat key=value config file; flags > config > defaults
std::map<std::string, std::string> load_config(const std::string& path) {
    std::map<std::string, std::string> kv;
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open config file: " + path);
    std::string line;
    while (std::getline(f, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t");
            size_t b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (!k.empty()) kv[k] = v;
    }
    return kv;
}

const NewformSpec& form_by_flag(const std::string& label) {
    return FormRegistry::instance().by_label(label);
}

struct Common {
    int threads = 0;
    uint64_t seed = 1;
    Output out;
};

void apply_config_defaults(CLI::App* cmd, const std::map<std::string, std::string>& cfg) {
    for (auto* opt : cmd->get_options()) {
        if (opt->count() > 0) continue;
        for (const std::string& name : opt->get_lnames()) {
            auto it = cfg.find(name);
            if (it != cfg.end()) {
                opt->add_result(it->second);
                break;
            }
        }
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"jutila-lab: modular-form L-function and Voronoi/Farey experiments"};
    app.require_subcommand(1);

    Common common;
    std::string config_path;
    app.add_option("--threads", common.threads, "worker threads (default: logical cores)");
    app.add_option("--seed", common.seed, "seed for randomized suites")->default_val("1");
    app.add_option("--config", config_path, "flat key=value config file");

    std::map<std::string, std::string> cfgmap;  // effective math-relevant config

    // ---- coeffs ----------------------------------------------------------
    auto* c_coeffs = app.add_subcommand("coeffs", "dump Fourier coefficients as CSV");
    std::string co_form = "1.12.a";
    int64_t co_limit = 100;
    c_coeffs->add_option("--form", co_form, "form label")->default_val("1.12.a");
    c_coeffs->add_option("--limit", co_limit, "largest n")->default_val("100");
    c_coeffs->add_option("--out", common.out.path, "output path or -")->default_val("-");

    // ---- lvalue ----------------------------------------------------------
    auto* c_lvalue = app.add_subcommand("lvalue", "L(1/2+it) by AFE or completed-Lambda route");
    std::string lv_form = "1.12.a", lv_method = "afe";
    double lv_t = 0;
    c_lvalue->add_option("--form", lv_form)->default_val("1.12.a");
    c_lvalue->add_option("--t", lv_t, "height t")->default_val("0");
    c_lvalue->add_option("--method", lv_method, "afe | lambda")->default_val("afe");
    c_lvalue->add_option("--out", common.out.path)->default_val("-");
    c_lvalue->add_option("--format", common.out.format, "csv | json")->default_val("csv");

    // ---- afe-check -------------------------------------------------------
    auto* c_afe = app.add_subcommand("afe-check", "AFE vs completed-Lambda cross-method report");
    std::string af_form = "1.12.a";
    double af_t = 0;
    c_afe->add_option("--form", af_form)->default_val("1.12.a");
    c_afe->add_option("--t", af_t)->default_val("0");
    c_afe->add_option("--out", common.out.path)->default_val("-");

    // ---- twist-check -----------------------------------------------------
    auto* c_twist = app.add_subcommand("twist-check", "Lemma-style additive twist identity residual");
    std::string tw_form = "9.4.a";
    int64_t tw_a = 1, tw_q = 3, tw_X = 100000;
    double tw_sre = 2, tw_sim = 0;
    c_twist->add_option("--form", tw_form)->default_val("9.4.a");
    c_twist->add_option("--a", tw_a)->default_val("1");
    c_twist->add_option("--q", tw_q)->default_val("3");
    c_twist->add_option("--s-re", tw_sre)->default_val("2");
    c_twist->add_option("--s-im", tw_sim)->default_val("0");
    c_twist->add_option("--X", tw_X)->default_val("100000");
    c_twist->add_option("--out", common.out.path)->default_val("-");

    // ---- voronoi-check ---------------------------------------------------
    auto* c_vor = app.add_subcommand("voronoi-check", "two-sided Voronoi summation check");
    std::string vo_form = "1.12.a", vo_support = "500:4000";
    int64_t vo_a = 1, vo_q = 5;
    double vo_edge = 0, vo_tol = 1e-5;
    c_vor->add_option("--form", vo_form)->default_val("1.12.a");
    c_vor->add_option("--a", vo_a)->default_val("1");
    c_vor->add_option("--q", vo_q)->default_val("5");
    c_vor->add_option("--support", vo_support, "A:B")->default_val("500:4000");
    c_vor->add_option("--edge", vo_edge, "smoothstep edge width (default (B-A)/4)")->default_val("0");
    c_vor->add_option("--tol", vo_tol, "relative tolerance")->default_val("1e-5");
    c_vor->add_option("--out", common.out.path)->default_val("-");

    // ---- farey -----------------------------------------------------------
    auto* c_farey = app.add_subcommand("farey", "dump a Farey system as CSV");
    double fa_t = 1e4;
    int64_t fa_M = 0, fa_M0 = 0, fa_M1 = 0, fa_M2 = 0, fa_level = 1;
    int fa_s = 6;
    c_farey->add_option("--t", fa_t)->default_val("10000");
    c_farey->add_option("--M", fa_M, "block scale (default ceil(t^(2/3)))")->default_val("0");
    c_farey->add_option("--M0", fa_M0, "default M")->default_val("0");
    c_farey->add_option("--M1", fa_M1, "default ceil(1.1 M)")->default_val("0");
    c_farey->add_option("--M2", fa_M2, "default ceil(1.9 M)")->default_val("0");
    c_farey->add_option("--s", fa_s, "partition smoothness (even, >= 6)")->default_val("6");
    c_farey->add_option("--level", fa_level, "level for the good/bad split")->default_val("1");
    c_farey->add_option("--out", common.out.path)->default_val("-");

    // ---- statphase-check -------------------------------------------------
    auto* c_stat = app.add_subcommand("statphase-check", "stationary phase vs direct integral");
    std::string st_form = "1.12.a", st_sign = "both";
    double st_t = 1e5;
    int64_t st_M = 0, st_M0 = 0, st_M1 = 0, st_M2 = 0, st_lmax = 0, st_r = 1;
    int st_j = 0;
    c_stat->add_option("--form", st_form)->default_val("1.12.a");
    c_stat->add_option("--t", st_t)->default_val("100000");
    c_stat->add_option("--M", st_M)->default_val("0");
    c_stat->add_option("--M0", st_M0)->default_val("0");
    c_stat->add_option("--M1", st_M1)->default_val("0");
    c_stat->add_option("--M2", st_M2)->default_val("0");
    c_stat->add_option("--j", st_j, "block index (default: middle)")->default_val("0");
    c_stat->add_option("--r", st_r)->default_val("1");
    c_stat->add_option("--lmax", st_lmax, "largest ell (default K1 r / d^2)")->default_val("0");
    c_stat->add_option("--sign", st_sign, "+ | - | both")->default_val("both");
    c_stat->add_option("--out", common.out.path)->default_val("-");

    // ---- sieve-count -----------------------------------------------------
    auto* c_sieve = app.add_subcommand("sieve-count", "resonance counting vs the five-term bound");
    double sv_t = 1e5, sv_d1 = 0.5, sv_d2 = 0.5;
    int64_t sv_M = 0, sv_M0 = 0, sv_M1 = 0, sv_M2 = 0, sv_r = 1;
    std::string sv_beta = "0/1", sv_band = "64,32,4";
    bool sv_grid = false;
    c_sieve->add_option("--t", sv_t)->default_val("100000");
    c_sieve->add_option("--M", sv_M)->default_val("0");
    c_sieve->add_option("--M0", sv_M0)->default_val("0");
    c_sieve->add_option("--M1", sv_M1)->default_val("0");
    c_sieve->add_option("--M2", sv_M2)->default_val("0");
    c_sieve->add_option("--r", sv_r)->default_val("1");
    c_sieve->add_option("--beta", sv_beta, "bad part c/d")->default_val("0/1");
    c_sieve->add_option("--band", sv_band, "L,U,V (powers of 2)")->default_val("64,32,4");
    c_sieve->add_option("--delta1", sv_d1)->default_val("0.5");
    c_sieve->add_option("--delta2", sv_d2)->default_val("0.5");
    c_sieve->add_flag("--gk-grid", sv_grid, "emit a CSV grid over X instead of one JSON row");
    c_sieve->add_option("--out", common.out.path)->default_val("-");
    c_sieve->add_option("--format", common.out.format)->default_val("json");

    // ---- scan ------------------------------------------------------------
    auto* c_scan = app.add_subcommand("scan", "subconvexity scan over a t grid");
    std::string sc_form = "1.12.a";
    double sc_tmin = 2, sc_tmax = 2000, sc_tstep = 2;
    c_scan->add_option("--form", sc_form)->default_val("1.12.a");
    c_scan->add_option("--t-min", sc_tmin)->default_val("2");
    c_scan->add_option("--t-max", sc_tmax)->default_val("2000");
    c_scan->add_option("--t-step", sc_tstep)->default_val("2");
    c_scan->add_option("--out", common.out.path)->default_val("-");
    c_scan->add_option("--format", common.out.format)->default_val("csv");

    std::vector<const char*> argv;
    argv.push_back("jutila");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        try {
            app.parse(int(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) {  // --help
                out << app.help() << "\n";
                return 0;
            }
            err << "error: " << e.what() << "\n" << app.help() << "\n";
            return 2;
        }
        if (!config_path.empty()) {
            auto cfg = load_config(config_path);
            for (auto* sub : app.get_subcommands()) apply_config_defaults(sub, cfg);
        }
        if (common.threads <= 0) common.threads = default_threads();

        auto put = [&](const std::string& k, const std::string& v) { cfgmap[k] = v; };
        put("seed", std::to_string(common.seed));

        if (*c_coeffs) {
            put("cmd", "coeffs");
            put("form", co_form);
            put("limit", std::to_string(co_limit));
            const auto& f = form_by_flag(co_form);
            auto tab = FormRegistry::instance().coefficients(f, co_limit);
            common.out.header(cfgmap);
            std::ostringstream body;
            dump_coeffs_csv(body, *tab, co_limit);
            common.out.buf << body.str();
        } else if (*c_lvalue) {
            put("cmd", "lvalue");
            put("form", lv_form);
            put("t", fmt(lv_t));
            put("method", lv_method);
            const auto& f = form_by_flag(lv_form);
            LValueRecord rec;
            if (lv_method == "afe") {
                CutoffG g;
                double C = analytic_conductor(f, lv_t);
                rec = afe_evaluate(f, lv_t, g, int64_t(std::ceil(2 * std::sqrt(C))));
            } else if (lv_method == "lambda") {
                rec = lvalue_completed(f, lv_t);
            } else {
                throw ValidationError("lvalue: --method must be afe or lambda");
            }
            common.out.header(cfgmap);
            if (common.out.format == "json") {
                nlohmann::ordered_json j{{"t", rec.t},
                                         {"re_L", rec.L.real()},
                                         {"im_L", rec.L.imag()},
                                         {"abs_L", std::abs(rec.L)},
                                         {"method", lv_method},
                                         {"X_trunc", rec.truncation},
                                         {"error_estimate", rec.error_estimate}};
                common.out.buf << j.dump(2) << "\n";
            } else {
                common.out.buf << "t,re_L,im_L,abs_L,method,X_trunc,error_estimate\n"
                               << fmt(rec.t) << ',' << fmt(rec.L.real()) << ','
                               << fmt(rec.L.imag()) << ',' << fmt(std::abs(rec.L)) << ','
                               << lv_method << ',' << rec.truncation << ','
                               << fmt(rec.error_estimate) << "\n";
            }
        } else if (*c_afe) {
            put("cmd", "afe-check");
            put("form", af_form);
            put("t", fmt(af_t));
            const auto& f = form_by_flag(af_form);
            CutoffG g;
            double C = analytic_conductor(f, af_t);
            auto a = afe_evaluate(f, af_t, g, int64_t(std::ceil(2 * std::sqrt(C))));
            auto l = lvalue_completed(f, af_t);
            common.out.header(cfgmap);
            common.out.buf << "t,afe_re,afe_im,lambda_re,lambda_im,abs_diff,afe_error_scale\n"
                           << fmt(af_t) << ',' << fmt(a.L.real()) << ',' << fmt(a.L.imag()) << ','
                           << fmt(l.L.real()) << ',' << fmt(l.L.imag()) << ','
                           << fmt(std::abs(a.L - l.L)) << ',' << fmt(a.error_estimate) << "\n";
        } else if (*c_twist) {
            put("cmd", "twist-check");
            put("form", tw_form);
            put("a", std::to_string(tw_a));
            put("q", std::to_string(tw_q));
            put("s", fmt(tw_sre) + "+" + fmt(tw_sim) + "i");
            put("X", std::to_string(tw_X));
            const auto& f = form_by_flag(tw_form);
            auto dec = additive_twist_decompose(f, tw_a, tw_q);
            auto res = verify_twist_identity(dec, cplx(tw_sre, tw_sim), tw_X);
            common.out.header(cfgmap);
            common.out.buf << "terms,residual,tail_bound,pass\n"
                           << dec.terms.size() << ',' << fmt(res.residual) << ','
                           << fmt(res.tail_bound) << ','
                           << (res.residual <= res.tail_bound ? 1 : 0) << "\n";
            common.out.buf << "m,chi_modulus,chi_conductor,coeff_re,coeff_im,twisted_form\n";
            for (const auto& t : dec.terms)
                common.out.buf << t.m << ',' << t.chi.modulus << ',' << t.chi.conductor << ','
                               << fmt(t.coeff.real()) << ',' << fmt(t.coeff.imag()) << ','
                               << t.form->label << "\n";
        } else if (*c_vor) {
            put("cmd", "voronoi-check");
            put("form", vo_form);
            put("a", std::to_string(vo_a));
            put("q", std::to_string(vo_q));
            put("support", vo_support);
            put("tol", fmt(vo_tol));
            const auto& f = form_by_flag(vo_form);
            auto colon = vo_support.find(':');
            if (colon == std::string::npos)
                throw ValidationError("voronoi-check: --support must be A:B");
            double A = std::stod(vo_support.substr(0, colon));
            double B = std::stod(vo_support.substr(colon + 1));
            double edge = vo_edge > 0 ? vo_edge : (B - A) / 4.0;
            put("edge", fmt(edge));
            TestFunction F(A, B, edge);
            auto tab = FormRegistry::instance().coefficients(f, int64_t(B) + 1);
            cplx lhs = voronoi_lhs(*tab, vo_a, vo_q, F);
            QuadratureSpec spec;
            spec.abs_tol = std::max(1e-10, vo_tol * std::max(1e-3, std::abs(lhs)) / 3.0);
            auto rhs = voronoi_rhs(f, vo_a, vo_q, F, spec, common.threads);
            double abs_err = std::abs(lhs - rhs.value);
            double rel = abs_err / std::max(1e-12, std::abs(lhs));
            common.out.header(cfgmap);
            common.out.buf
                << "lhs_re,lhs_im,rhs_re,rhs_im,abs_err,rel_err,ell_trunc,tail_est,converged\n"
                << fmt(lhs.real()) << ',' << fmt(lhs.imag()) << ',' << fmt(rhs.value.real())
                << ',' << fmt(rhs.value.imag()) << ',' << fmt(abs_err) << ',' << fmt(rel) << ','
                << rhs.ell_used << ',' << fmt(rhs.tail_estimate) << ','
                << (rhs.converged ? 1 : 0) << "\n";
            if (!rhs.converged)
                throw BudgetExceeded("voronoi-check: ell truncation budget exhausted",
                                     rhs.tail_estimate);
        } else if (*c_farey) {
            put("cmd", "farey");
            if (fa_M == 0) fa_M = int64_t(std::ceil(std::pow(fa_t, 2.0 / 3.0)));
            if (fa_M0 == 0) fa_M0 = fa_M;
            if (fa_M1 == 0) fa_M1 = int64_t(std::ceil(1.1 * double(fa_M)));
            if (fa_M2 == 0) fa_M2 = int64_t(std::ceil(1.9 * double(fa_M)));
            put("t", fmt(fa_t));
            put("M", std::to_string(fa_M));
            put("M0", std::to_string(fa_M0));
            put("M1", std::to_string(fa_M1));
            put("M2", std::to_string(fa_M2));
            put("s", std::to_string(fa_s));
            put("level", std::to_string(fa_level));
            auto params = FareyParams::make(fa_t, fa_M, fa_M0, fa_M1, fa_M2, fa_s);
            auto sys = build_farey_system(params, fa_level);
            common.out.header(cfgmap);
            common.out.buf << "j,u_j,v_j,rho_num,rho_den,N_j,q_j,d_j,c_j,a_j\n";
            for (int j = 1; j <= sys.J(); ++j) {
                const auto& sp = sys.splits[size_t(j - 1)];
                int64_t rn = 0, rd = 0;
                if (j < sys.J()) {
                    rn = sys.rho[size_t(j - 1)].num;
                    rd = sys.rho[size_t(j - 1)].den;
                }
                common.out.buf << j << ',' << sys.u[size_t(j - 1)] << ',' << sys.v[size_t(j - 1)]
                               << ',' << rn << ',' << rd << ',' << sys.breakpoints[size_t(j)]
                               << ',' << sp.q << ',' << sp.d << ',' << sp.c << ',' << sp.a
                               << "\n";
            }
        } else if (*c_stat) {
            put("cmd", "statphase-check");
            const auto& f = form_by_flag(st_form);
            if (st_M == 0) st_M = int64_t(std::ceil(std::pow(st_t, 2.0 / 3.0)));
            if (st_M0 == 0) st_M0 = st_M;
            if (st_M1 == 0) st_M1 = int64_t(std::ceil(1.1 * double(st_M)));
            if (st_M2 == 0) st_M2 = int64_t(std::ceil(1.9 * double(st_M)));
            put("form", st_form);
            put("t", fmt(st_t));
            put("M", std::to_string(st_M));
            put("M0", std::to_string(st_M0));
            put("M1", std::to_string(st_M1));
            put("M2", std::to_string(st_M2));
            put("r", std::to_string(st_r));
            put("sign", st_sign);
            auto params = FareyParams::make(st_t, st_M, st_M0, st_M1, st_M2, 6);
            auto sys = build_farey_system(params, f.level);
            if (st_j == 0) st_j = (sys.J() + 1) / 2;
            put("j", std::to_string(st_j));
            auto bd = make_block_phase_data(sys, st_j, st_r);
            auto tp = make_transform_params(params);
            int64_t lmax = st_lmax > 0
                               ? st_lmax
                               : int64_t(double(tp.K1) * double(st_r) / double(bd.d * bd.d));
            put("lmax", std::to_string(lmax));
            std::vector<Sign> signs;
            if (st_sign == "+") signs = {Sign::Plus};
            else if (st_sign == "-") signs = {Sign::Minus};
            else signs = {Sign::Plus, Sign::Minus};
            QuadratureSpec spec;
            spec.abs_tol = 1e-9;
            common.out.header(cfgmap);
            common.out.buf << "ell,sign,x_star,direct_re,direct_im,main_re,main_im,rel_err\n";
            int64_t step = std::max<int64_t>(1, lmax / 24);
            for (int64_t ell = 1; ell <= lmax; ell += step) {
                for (Sign sg : signs) {
                    double xs = stationary_point(bd, double(ell) / double(st_r), sg);
                    if (sys.omega_j(st_j, xs) == 0.0) continue;
                    auto rep = check_stationary_phase(bd, ell, sg, spec);
                    common.out.buf << ell << ',' << (sg == Sign::Plus ? '+' : '-') << ','
                                   << fmt(xs) << ',' << fmt(rep.direct.real()) << ','
                                   << fmt(rep.direct.imag()) << ',' << fmt(rep.main.real()) << ','
                                   << fmt(rep.main.imag()) << ',' << fmt(rep.rel_err) << "\n";
                }
            }
        } else if (*c_sieve) {
            put("cmd", "sieve-count");
            if (sv_M == 0) sv_M = int64_t(std::ceil(std::pow(sv_t, 2.0 / 3.0)));
            if (sv_M0 == 0) sv_M0 = std::max<int64_t>(1, sv_M / 16);
            if (sv_M1 == 0) sv_M1 = int64_t(std::ceil(1.1 * double(sv_M)));
            if (sv_M2 == 0) sv_M2 = int64_t(std::ceil(1.9 * double(sv_M)));
            auto slash = sv_beta.find('/');
            if (slash == std::string::npos) throw ValidationError("sieve-count: --beta must be c/d");
            int64_t bc = std::stoll(sv_beta.substr(0, slash));
            int64_t bdn = std::stoll(sv_beta.substr(slash + 1));
            std::vector<int64_t> band;
            {
                std::stringstream ss(sv_band);
                std::string tok;
                while (std::getline(ss, tok, ',')) band.push_back(std::stoll(tok));
            }
            if (band.size() != 3) throw ValidationError("sieve-count: --band must be L,U,V");
            put("t", fmt(sv_t));
            put("M", std::to_string(sv_M));
            put("M0", std::to_string(sv_M0));
            put("M1", std::to_string(sv_M1));
            put("M2", std::to_string(sv_M2));
            put("r", std::to_string(sv_r));
            put("beta", sv_beta);
            put("band", sv_band);
            put("delta1", fmt(sv_d1));
            put("delta2", fmt(sv_d2));
            auto params = FareyParams::make(sv_t, sv_M, sv_M0, sv_M1, sv_M2, 6);
            auto sys = build_farey_system(params, 1);
            auto bandv = make_sieve_band(sys, sv_r, bc, bdn, band[0], band[1], band[2]);
            RegionR region{bandv.U1, bandv.U2, bandv.V1, bandv.V2, bc, bdn};
            double A = double(sv_r) / double(bdn) *
                       (double(bandv.U1) + double(bc) / double(bdn) * double(bandv.V1));
            double Cpar = double(bandv.V1) / double(bdn);
            common.out.header(cfgmap);
            if (sv_grid) {
                common.out.buf << "X,delta1,delta2,count_B,gk_bound,ratio\n";
                for (double X = bandv.X0; X <= double(bandv.L) * 1.0001;
                     X *= std::pow(double(bandv.L) / bandv.X0, 1.0 / 12.0)) {
                    ResonanceQuery qy;
                    qy.delta1 = std::min(0.5, double(bandv.L) / (X * X));
                    qy.delta2 = std::min(1.0, double(bandv.L) / (bandv.eta * X * X));
                    qy.region = region;
                    qy.UV = double(bandv.U) * double(bandv.V);
                    int64_t B = resonance_count_B(sys, sv_r, qy);
                    double gk = gk_bound(std::max(1e-12, qy.delta1), std::max(1e-12, qy.delta2),
                                         A, Cpar);
                    common.out.buf << fmt(X) << ',' << fmt(qy.delta1) << ',' << fmt(qy.delta2)
                                   << ',' << B << ',' << fmt(gk) << ',' << fmt(double(B) / gk)
                                   << "\n";
                }
            } else {
                ResonanceQuery qy{sv_d1, sv_d2, region, double(bandv.U) * double(bandv.V)};
                int64_t B = resonance_count_B(sys, sv_r, qy);
                double gk = gk_bound(std::max(1e-12, sv_d1), std::max(1e-12, sv_d2), A, Cpar);
                if (common.out.format == "json") {
                    nlohmann::ordered_json j{{"count_B", B},
                                             {"gk_bound", gk},
                                             {"ratio", double(B) / gk}};
                    common.out.buf << j.dump(2) << "\n";
                } else {
                    common.out.buf << "count_B,gk_bound,ratio\n"
                                   << B << ',' << fmt(gk) << ',' << fmt(double(B) / gk) << "\n";
                }
            }
        } else if (*c_scan) {
            put("cmd", "scan");
            put("form", sc_form);
            put("t-min", fmt(sc_tmin));
            put("t-max", fmt(sc_tmax));
            put("t-step", fmt(sc_tstep));
            const auto& f = form_by_flag(sc_form);
            std::vector<double> grid;
            for (double t = sc_tmin; t <= sc_tmax + 1e-12; t += sc_tstep) grid.push_back(t);
            auto rows = subconvexity_scan(f, grid, common.threads);
            common.out.header(cfgmap);
            common.out.buf << "# m0-rule=ceil(t^(2/3))\n";
            common.out.buf << "t,re_L,im_L,abs_L,weyl_ratio,convexity_ratio,C,X_trunc\n";
            for (const auto& r : rows)
                common.out.buf << fmt(r.t) << ',' << fmt(r.re_L) << ',' << fmt(r.im_L) << ','
                               << fmt(r.abs_L) << ',' << fmt(r.weyl_ratio) << ','
                               << fmt(r.convexity_ratio) << ',' << fmt(r.C) << ',' << r.X_trunc
                               << "\n";
        }

        common.out.flush(out);
        return 0;
    } catch (const UnsupportedTwist& e) {
        err << "unsupported-twist: " << e.what() << "\n";
        return 4;
    } catch (const BudgetExceeded& e) {
        common.out.flush(out);
        err << "budget-exceeded: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        err << "validation-error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace jutila::cli
