#include "curvheat/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "curvheat/analytic.hpp"
#include "curvheat/asymptotics.hpp"
#include "curvheat/format.hpp"
#include "curvheat/geometry.hpp"
#include "curvheat/heat_coeff.hpp"
#include "curvheat/morse.hpp"
#include "curvheat/spectral.hpp"

namespace curvheat {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

unsigned thread_cap() {
    if (const char* env = std::getenv("CURVHEAT_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i < count on up to CURVHEAT_THREADS workers; rethrows the
// first failure. Callers write into preallocated slots so output stays ordered.
template <typename Fn>
void parallel_cells(std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(thread_cap(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw usage_error(std::string("bad ") + what + " value: " + tok);
        }
    }
    if (out.empty()) throw usage_error(std::string("empty ") + what + " list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    for (double v : parse_double_list(text, what)) out.push_back(static_cast<int>(v));
    return out;
}

ModelGeometry resolve_geometry(const std::string& spec, const std::string& manifest) {
    if (!manifest.empty()) {
        if (manifest == "-") return load_sampled_stream(std::cin);
        std::ifstream in(manifest);
        if (!in) throw validation_error("cannot open manifest: " + manifest);
        return load_sampled_stream(in);
    }
    if (spec == "cp1") return make_cp1();
    if (spec.rfind("file:", 0) == 0) {
        const std::string path = spec.substr(5);
        if (path == "-") return load_sampled_stream(std::cin);
        std::ifstream in(path);
        if (!in) throw validation_error("cannot open manifest: " + path);
        return load_sampled_stream(in);
    }
    if (spec.rfind("torus:", 0) == 0) {
        std::vector<int> degrees;
        std::vector<double> areas;
        int mode = 0;  // 1 = reading d list, 2 = reading A list
        std::stringstream ss(spec.substr(6));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.rfind("d=", 0) == 0) {
                mode = 1;
                tok = tok.substr(2);
            } else if (tok.rfind("A=", 0) == 0) {
                mode = 2;
                tok = tok.substr(2);
            }
            try {
                if (mode == 1) {
                    degrees.push_back(std::stoi(tok));
                } else if (mode == 2) {
                    areas.push_back(std::stod(tok));
                } else {
                    throw usage_error("torus spec must start with d=");
                }
            } catch (const usage_error&) {
                throw;
            } catch (...) {
                throw usage_error("bad torus parameter: " + tok);
            }
        }
        if (areas.empty()) areas.assign(degrees.size(), 1.0);
        return make_torus(degrees, areas);
    }
    throw usage_error("unknown geometry spec: " + spec +
                      " (expected torus:d=...,A=..., cp1, or file:<path>)");
}

struct OutputSink {
    std::string path;

    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream out(path);
        if (!out) throw validation_error("cannot open output file: " + path);
        out << text;
    }
};

nlohmann::json table_to_tree(const CsvTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        nlohmann::json obj;
        for (std::size_t i = 0; i < table.header.size(); ++i) {
            obj[table.header[i]] = (i < r.size()) ? r[i] : "";
        }
        rows.push_back(std::move(obj));
    }
    return rows;
}

void emit(const CsvTable& table, const std::string& format, const OutputSink& sink) {
    if (format == "tree") {
        sink.write(table_to_tree(table).dump(2) + "\n");
    } else {
        sink.write(table.str());
    }
}

std::string nstr(int v) { return std::to_string(v); }

// Deterministic uniform in [-range, range] from raw 64-bit draws.
double uniform_pm(std::mt19937_64& rng, double range) {
    return range * (2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0);
}

// ---------------- subcommand runners ----------------

int run_coeff(const ModelGeometry& geom, const std::vector<double>& us,
              const std::vector<int>& qs, const std::string& format, const OutputSink& sink) {
    CsvTable table;
    table.header = {"u", "q", "point", "weight", "e0_trace", "e0_bochner"};
    for (double u : us) {
        for (int q : qs) {
            if (q < 0 || q > geom.n) throw usage_error("q out of range for this geometry");
            double int_trace = 0.0, int_boch = 0.0;
            for (std::size_t i = 0; i < geom.points.size(); ++i) {
                const auto& pt = geom.points[i];
                const double tr = e0_trace(pt.alphas, u, q, pt.rank_e);
                const double bo = e0_bochner(pt.alphas, u);
                int_trace += tr * pt.weight;
                int_boch += bo * pt.weight;
                table.rows.push_back({fmt17(u), nstr(q), nstr(static_cast<int>(i)),
                                      fmt17(pt.weight), fmt17(tr), fmt17(bo)});
            }
            table.rows.push_back({fmt17(u), nstr(q), "integral", fmt17(geom.volume),
                                  fmt17(int_trace), fmt17(int_boch)});
        }
    }
    emit(table, format, sink);
    return 0;
}

int run_bounds(const ModelGeometry& geom, const std::string& geom_name,
               const std::vector<int>& ps, const std::vector<double>& us,
               const std::vector<int>& qs, double zero_tol, const std::string& format,
               const OutputSink& sink) {
    CsvTable table;
    table.header = {"geom", "q", "p", "u", "kind", "value", "margin", "verdict"};
    for (int q : qs) {
        const auto wb = weak_bound(geom, q, zero_tol);
        const auto sb = strong_bound(geom, q, zero_tol);
        const std::string warn = wb.coverage_warning ? "degenerate-coverage-warning" : "";
        table.rows.push_back({geom_name, nstr(q), "", "", "weak", fmt17(wb.value), "", warn});
        table.rows.push_back({geom_name, nstr(q), "", "", "strong", fmt17(sb.value), "", warn});
        for (double u : us) {
            table.rows.push_back({geom_name, nstr(q), "", fmt17(u), "u_bound",
                                  fmt17(u_bound(geom, q, u)), "", ""});
        }
    }
    // With tensor powers given, attach the full inequality report per (p, u).
    bool all_pass = true;
    for (int p : ps) {
        for (double u : us) {
            const auto rep = verify_inequalities(geom, p, u);
            all_pass = all_pass && rep.all_pass;
            for (const auto& c : rep.checks) {
                table.rows.push_back({geom_name, nstr(c.q), nstr(p), fmt17(u), c.kind,
                                      fmt17(c.lhs), fmt17(c.margin),
                                      c.pass ? "pass" : "FAIL"});
            }
        }
    }
    emit(table, format, sink);
    return all_pass ? 0 : 1;
}

int run_spectrum_export(const ModelGeometry& geom, const std::vector<int>& ps,
                        const std::vector<double>& us, const std::vector<int>& qs,
                        const std::string& format, const OutputSink& sink) {
    // Truncation depth taken from the smallest heat time u/p in the request.
    double t_min = 1e300;
    for (int p : ps) {
        for (double u : us) t_min = std::min(t_min, u / p);
    }
    CsvTable table;
    table.header = {"p", "q", "lambda", "multiplicity"};
    for (int p : ps) {
        for (int q : qs) {
            const auto series =
                (geom.kind == GeometryKind::CP1FubiniStudy)
                    ? cp1_spectrum(p, q, cp1_suggested_cutoff(p, q, t_min))
                    : torus_spectrum(geom, p, q, suggested_cutoff(geom, p, q, t_min));
            for (const auto& lv : series.levels) {
                table.rows.push_back({nstr(p), nstr(q), fmt17(lv.lambda),
                                      fmt17(lv.multiplicity)});
            }
        }
    }
    emit(table, format, sink);
    return 0;
}

int run_trace(const ModelGeometry& geom, const std::vector<int>& ps,
              const std::vector<double>& us, const std::vector<int>& qs,
              const std::string& format, const OutputSink& sink) {
    struct Cell {
        int p, q;
        double u;
        std::vector<std::string> row;
    };
    std::vector<Cell> cells;
    for (int p : ps) {
        for (double u : us) {
            for (int q : qs) cells.push_back({p, q, u, {}});
        }
    }
    parallel_cells(cells.size(), [&](std::size_t i) {
        auto& c = cells[i];
        const auto tr = model_graded_trace(geom, c.p, c.q, c.u / c.p);
        const double lead = std::pow(c.p / c.u, geom.n) *
                            integrate(geom, [&](const CurvaturePoint& pt) {
                                return e0_trace(pt.alphas, c.u, c.q, pt.rank_e);
                            });
        const double rel = (lead != 0.0) ? (tr.value - lead) / lead : tr.value;
        c.row = {nstr(c.p), fmt17(c.u), nstr(c.q), fmt17(tr.value), fmt17(tr.bound),
                 fmt17(lead), fmt17(rel)};
    });
    CsvTable table;
    table.header = {"p", "u", "q", "trace", "truncation_bound", "leading_term", "rel_dev"};
    for (auto& c : cells) table.rows.push_back(std::move(c.row));
    emit(table, format, sink);
    return 0;
}

int run_sweep(const ModelGeometry& geom, const std::vector<double>& us,
              const std::vector<int>& qs, double zero_tol, const std::string& format,
              const OutputSink& sink) {
    CsvTable table;
    table.header = {"q", "u", "point", "scaled_trace", "limit_kind", "limit_value"};
    for (int q : qs) {
        for (std::size_t i = 0; i < geom.points.size(); ++i) {
            const auto& pt = geom.points[i];
            const auto lim = large_u_limit(pt.alphas, q, zero_tol);
            const char* kind = lim.kind == LargeULimit::Kind::Nondegenerate ? "nondegenerate"
                               : lim.kind == LargeULimit::Kind::Degenerate  ? "degenerate"
                                                                            : "vanishing";
            const auto trend = u_trend_check(pt.alphas, q, us);
            for (const auto& [u, val] : trend) {
                const double limit_at_u =
                    lim.coefficient * std::pow(u, -lim.vanishing_exponent);
                table.rows.push_back({nstr(q), fmt17(u), nstr(static_cast<int>(i)), fmt17(val),
                                      kind, fmt17(limit_at_u)});
            }
        }
    }
    emit(table, format, sink);
    return 0;
}

int run_fit(const ModelGeometry& geom, const std::vector<int>& ps, const std::vector<double>& us,
            const std::vector<int>& qs, int k, const std::string& format,
            const OutputSink& sink) {
    if (geom.kind == GeometryKind::Sampled) {
        throw validation_error("fit: spectra are available only for built-in models");
    }
    CsvTable table;
    table.header = {"u",        "q",         "row",       "r", "fitted", "predicted",
                    "abs_diff", "rel_diff",  "residual_order", "condition"};
    struct Cell {
        double u;
        int q;
        std::vector<std::vector<std::string>> rows;
    };
    std::vector<Cell> cells;
    for (double u : us) {
        for (int q : qs) cells.push_back({u, q, {}});
    }
    parallel_cells(cells.size(), [&](std::size_t i) {
        auto& cell = cells[i];
        const auto rep = expansion_report(geom, cell.u, ps, k, cell.q);
        for (int r = 0; r <= k; ++r) {
            const auto& pred = rep.predicted[static_cast<std::size_t>(r)];
            const double fit = rep.fitted[static_cast<std::size_t>(r)];
            std::string pstr, astr, rstr;
            if (pred) {
                pstr = fmt17(*pred);
                astr = fmt17(std::abs(fit - *pred));
                rstr = fmt17(std::abs(fit - *pred) / std::max(1e-300, std::abs(*pred)));
            }
            cell.rows.push_back({fmt17(cell.u), nstr(cell.q), "coeff", nstr(r), fmt17(fit),
                                 pstr, astr, rstr, "", ""});
        }
        cell.rows.push_back({fmt17(cell.u), nstr(cell.q), "summary", "", "", "", "", "",
                             rep.residual_order ? fmt17(*rep.residual_order) : "",
                             fmt17(rep.condition)});
    });
    for (auto& cell : cells) {
        for (auto& r : cell.rows) table.rows.push_back(std::move(r));
    }
    emit(table, format, sink);
    return 0;
}

int run_verify(const ModelGeometry& geom, std::vector<int> ps, std::vector<double> us,
               const std::string& format, const OutputSink& sink) {
    if (ps.empty()) ps = {5, 10};
    if (us.empty()) us = {0.5, 1.0};
    CsvTable table;
    table.header = {"check", "params", "deviation", "status"};
    bool all_pass = true;
    auto report = [&](const std::string& name, const std::string& params, double dev,
                      bool pass) {
        all_pass = all_pass && pass;
        table.rows.push_back({name, params, fmt17(dev), pass ? "pass" : "FAIL"});
    };

    // Pointwise coefficient identities on seeded random curvature data.
    std::mt19937_64 rng(20240811u);
    double phi_dev = 0.0, ms_dev = 0.0, serre_dev = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4);
        std::vector<double> alphas(static_cast<std::size_t>(n));
        for (auto& a : alphas) a = uniform_pm(rng, 5.0);
        for (double u : {0.1, 1.0, 3.0}) {
            const double lhs = std::pow(kFourPi * u, -n) * phi0(alphas, {2.0 * u, 0.0}).real();
            const double rhs = std::pow(u, -n) * e0_bochner(alphas, u);
            phi_dev = std::max(phi_dev, std::abs(lhs - rhs) / std::abs(rhs));

            const auto endo = e0_endo(alphas, u);
            double super = 0.0, total = 0.0;
            for (std::uint32_t mask = 0; mask < endo.values.size(); ++mask) {
                super += (__builtin_popcount(mask) % 2 == 0 ? 1.0 : -1.0) * endo.values[mask];
                total += endo.values[mask];
            }
            double exact = std::pow(2.0 * std::numbers::pi, -n);
            for (double a : alphas) exact *= u * a;
            // Cancellation scale of the alternating sum is the positive total.
            ms_dev = std::max(ms_dev,
                              std::abs(super - exact) / std::max(std::abs(exact), total));

            std::vector<double> neg(alphas);
            for (auto& a : neg) a = -a;
            for (int q = 0; q <= n; ++q) {
                const double a1 = e0_trace(alphas, u, q, 1);
                const double a2 = e0_trace(neg, u, n - q, 1);
                serre_dev = std::max(serre_dev, std::abs(a1 - a2) / std::abs(a1));
            }
        }
    }
    report("phi0_identity", "100 random alphas", phi_dev, phi_dev <= 1e-12);
    report("local_mckean_singer", "100 random alphas", ms_dev, ms_dev <= 1e-12);
    report("serre_symmetry", "100 random alphas", serre_dev, serre_dev <= 1e-12);

    const bool model = geom.kind != GeometryKind::Sampled;
    if (model) {
        for (int p : ps) {
            for (double u : us) {
                try {
                    const double super = mckean_singer(geom, p, u);
                    const double chi = static_cast<double>(euler_characteristic(geom, p));
                    report("mckean_singer", "p=" + nstr(p) + ",u=" + fmt17(u),
                           std::abs(super - chi), true);
                } catch (const oracle_error&) {
                    report("mckean_singer", "p=" + nstr(p) + ",u=" + fmt17(u), -1.0, false);
                }
            }
        }
        if (geom.kind == GeometryKind::TorusDiag) {
            bool flat_ok = true;
            for (int d : geom.degrees) flat_ok = flat_ok && d != 0;
            if (flat_ok) {
                for (int p : ps) {
                    for (double u : us) {
                        const double t = u / p;
                        const auto s = torus_spectrum(geom, p, 0,
                                                      suggested_cutoff(geom, p, 0, t));
                        const auto tr = heat_trace(s, t);
                        const double lead =
                            std::pow(p / u, geom.n) *
                            integrate(geom, [&](const CurvaturePoint& pt) {
                                return e0_trace(pt.alphas, u, 0, pt.rank_e);
                            });
                        const double dev = std::abs(tr.value - lead);
                        report("torus_exactness", "p=" + nstr(p) + ",u=" + fmt17(u), dev,
                               dev <= 1e-10 * std::abs(lead) + tr.truncation_bound);
                    }
                }
            }
        }
        bool morse_ok = true;
        double worst = 0.0;
        for (int p : ps) {
            for (double u : us) {
                const auto rep = verify_inequalities(geom, p, u);
                morse_ok = morse_ok && rep.all_pass;
                for (const auto& c : rep.checks) {
                    if (!c.pass) worst = std::min(worst, c.margin);
                }
            }
        }
        report("morse_chain", "all p,u", worst, morse_ok);
    }

    emit(table, format, sink);
    return all_pass ? 0 : 1;
}

}  // namespace

std::vector<int> parse_p_range(const std::string& text) {
    const auto c1 = text.find(':');
    if (c1 == std::string::npos) return parse_int_list(text, "p");
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw usage_error("p range needs start:stop:<step|log>");
    int start = 0, stop = 0;
    try {
        start = std::stoi(text.substr(0, c1));
        stop = std::stoi(text.substr(c1 + 1, c2 - c1 - 1));
    } catch (...) {
        throw usage_error("bad p range bounds: " + text);
    }
    const std::string step = text.substr(c2 + 1);
    if (start < 1 || stop < start) throw usage_error("bad p range bounds: " + text);
    std::vector<int> out;
    if (step == "log") {
        // Half-octave grid: 32:256:log -> 32 48 64 96 128 192 256.
        double v = start;
        int parity = 0;
        while (static_cast<int>(std::lround(v)) <= stop) {
            const int iv = static_cast<int>(std::lround(v));
            if (out.empty() || out.back() != iv) out.push_back(iv);
            v *= (parity++ % 2 == 0) ? 1.5 : 4.0 / 3.0;
        }
    } else {
        int by = 0;
        try {
            by = std::stoi(step);
        } catch (...) {
            throw usage_error("bad p range step: " + step);
        }
        if (by < 1) throw usage_error("p range step must be positive");
        for (int v = start; v <= stop; v += by) out.push_back(v);
    }
    if (out.empty()) throw usage_error("empty p range: " + text);
    return out;
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"heat-coefficient and Morse-bound calculator for line bundle tensor powers"};
    app.require_subcommand(1);

    std::string geometry = "cp1";
    std::string manifest;
    std::string u_list, p_range, q_list;
    int k = 1;
    double zero_tol = 1e-9;
    std::string format = "csv";
    std::string out_path;
    bool spectrum_export = false;

    for (auto* name : {"coeff", "bounds", "trace", "verify", "sweep", "fit"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--geometry", geometry);
        sub->add_option("--manifest", manifest);
        sub->add_option("--u", u_list);
        sub->add_option("--p", p_range);
        sub->add_option("--q", q_list);
        sub->add_option("--k", k);
        sub->add_option("--zero-tol", zero_tol);
        sub->add_option("--format", format)->check(CLI::IsMember({"csv", "tree"}));
        sub->add_option("--out", out_path);
        if (std::string(name) == "trace") {
            sub->add_flag("--spectrum", spectrum_export,
                          "emit raw spectra (p,q,lambda,multiplicity) instead of traces");
        }
    }

    try {
        try {
            std::vector<std::string> reversed(args.rbegin(), args.rend());
            app.parse(reversed);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) {  // --help
                std::cout << app.help();
                return 0;
            }
            throw usage_error(e.what());
        }
        const auto started = std::chrono::steady_clock::now();
        const std::string cmd = app.get_subcommands().front()->get_name();
        const ModelGeometry geom = resolve_geometry(geometry, manifest);
        const OutputSink sink{out_path};

        std::vector<double> us;
        if (!u_list.empty()) us = parse_double_list(u_list, "u");
        std::vector<int> ps;
        if (!p_range.empty()) ps = parse_p_range(p_range);
        std::vector<int> qs;
        if (!q_list.empty()) {
            qs = parse_int_list(q_list, "q");
        } else {
            for (int q = 0; q <= geom.n; ++q) qs.push_back(q);
        }
        if (!(zero_tol > 0.0)) throw usage_error("zero-tol must be positive");
        if (k < 0 || k > 3) throw usage_error("k must be in 0..3");

        int rc = 0;
        if (cmd == "coeff") {
            if (us.empty()) throw usage_error("coeff requires --u");
            rc = run_coeff(geom, us, qs, format, sink);
        } else if (cmd == "bounds") {
            const std::string label = manifest.empty() ? geometry : ("manifest:" + manifest);
            rc = run_bounds(geom, label, ps, us, qs, zero_tol, format, sink);
        } else if (cmd == "trace") {
            if (us.empty() || ps.empty()) throw usage_error("trace requires --u and --p");
            rc = spectrum_export ? run_spectrum_export(geom, ps, us, qs, format, sink)
                                 : run_trace(geom, ps, us, qs, format, sink);
        } else if (cmd == "sweep") {
            if (us.empty()) throw usage_error("sweep requires --u");
            rc = run_sweep(geom, us, qs, zero_tol, format, sink);
        } else if (cmd == "fit") {
            if (us.empty() || ps.empty()) throw usage_error("fit requires --u and --p");
            if (q_list.empty()) qs = {0};
            rc = run_fit(geom, ps, us, qs, k, format, sink);
        } else if (cmd == "verify") {
            rc = run_verify(geom, ps, us, format, sink);
        }
        const auto elapsed = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        std::cerr << "# " << cmd << " completed in " << elapsed << " s\n";
        return rc;
    } catch (const usage_error& e) {
        std::cerr << "ERROR 2: " << e.what() << "\n";
        return 2;
    } catch (const verification_error& e) {
        std::cerr << "ERROR 1: " << e.what() << "\n";
        return 1;
    } catch (const oracle_error& e) {
        std::cerr << "ERROR 1: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ERROR 3: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace curvheat
