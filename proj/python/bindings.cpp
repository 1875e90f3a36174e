#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fbme/bounds.hpp"
#include "fbme/errors.hpp"
#include "fbme/gaussian.hpp"
#include "fbme/scheme.hpp"
#include "fbme/trees.hpp"
#include "fbme/variational.hpp"

namespace py = pybind11;
using namespace fbme;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const GridPath& p) {
    Array a({p.steps() + 1, p.dims()});
    std::copy(p.raw().begin(), p.raw().end(), a.mutable_data());
    return a;
}

GridPath from_array(const Array& a, double T) {
    if (a.ndim() != 2 || a.shape(0) < 2) throw DomainError("path array must have shape (n+1, dims) with n >= 1");
    const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
    return GridPath(Grid(rows - 1, T), cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::list to_list(const std::vector<GridPath>& v) {
    py::list out;
    for (const auto& p : v) out.append(to_array(p));
    return out;
}

py::dict branch_dict(const BranchInfo& b) {
    py::dict d;
    d["labels"] = b.labels;
    d["ell"] = b.stats.ell;
    d["alpha"] = b.stats.alpha;
    d["coeff"] = std::to_string(b.lemma_coeff.num) + (b.lemma_coeff.den == 1 ? "" : "/" + std::to_string(b.lemma_coeff.den));
    return d;
}

struct Scheme {
    SchemeConfig cfg;

    Scheme(const std::string& bank, std::size_t m, std::size_t d, double H, std::size_t n, double T,
           std::optional<std::vector<double>> y0, double scale, std::optional<double> p) {
        cfg.vf = make_bank(bank, m, d, scale);
        cfg.hp = p ? HurstParams(H, *p) : HurstParams::with_default_p(H);
        cfg.grid = Grid(n, T);
        cfg.y0 = y0 ? *y0 : std::vector<double>(m, 0.0);
        cfg.validate();
    }

    GridPath path(const Array& a) const {
        GridPath p = from_array(a, cfg.grid.T);
        if (!(p.grid() == cfg.grid) || p.dims() != cfg.vf.d)
            throw DomainError("noise array must have shape (n+1, d) matching the scheme");
        return p;
    }
};

}  // namespace

PYBIND11_MODULE(_fbme, m) {
    m.doc() = "Modified Euler scheme for fBm-driven SDEs with tree-indexed derivative recursions.";

    py::register_exception<CapabilityError>(m, "CapabilityError", PyExc_ValueError);
    py::register_exception<FactorizationError>(m, "FactorizationError", PyExc_RuntimeError);
    static py::exception<OverflowError> overflow(m, "SchemeOverflow", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const OverflowError& e) {
            py::object err = py::handle(overflow.ptr())(e.what());
            err.attr("step") = e.step();
            PyErr_SetObject(overflow.ptr(), err.ptr());
        }
    });

    m.def("fbm_covariance", &fbm_covariance, py::arg("s"), py::arg("t"), py::arg("H"));
    m.def("companion_seed", &companion_seed, py::arg("seed"));
    m.def("bank_names", &bank_names);
    m.def(
        "sample_fbm",
        [](std::size_t n, double H, std::size_t dims, std::uint64_t seed, double T) {
            return to_array(sample_fbm(Grid(n, T), H, dims, seed));
        },
        py::arg("n"), py::arg("H"), py::arg("dims"), py::arg("seed"), py::arg("T") = 1.0);
    m.def(
        "cameron_martin_direction",
        [](std::size_t n, double anchor, double H, std::vector<double> weights, double T) {
            return to_array(cameron_martin_direction(Grid(n, T), anchor, H, weights));
        },
        py::arg("n"), py::arg("anchor"), py::arg("H"), py::arg("weights"), py::arg("T") = 1.0);
    m.def(
        "chen_residual",
        [](const Array& x, std::size_t refine, double T) {
            return check_chen(RoughLift::piecewise_linear(from_array(x, T), refine));
        },
        py::arg("x"), py::arg("refine") = 1, py::arg("T") = 1.0);
    m.def(
        "p_variation_norm",
        [](const Array& x, double p) {
            GridPath g = from_array(x, 1.0);
            return p_variation_norm(g, 0, g.steps(), p);
        },
        py::arg("x"), py::arg("p"));

    m.def(
        "tree_level",
        [](int N) {
            py::list out;
            for (const auto& b : tree_level(N)) out.append(branch_dict(b));
            return out;
        },
        py::arg("N"));
    m.def(
        "branch_stats",
        [](const std::vector<int>& labels) {
            auto st = branch_stats(labels);
            return py::make_tuple(st.ell, st.alpha);
        },
        py::arg("labels"));
    m.def("Kmu", &Kmu, py::arg("mu"));

    py::class_<Scheme>(m, "Scheme")
        .def(py::init<const std::string&, std::size_t, std::size_t, double, std::size_t, double,
                      std::optional<std::vector<double>>, double, std::optional<double>>(),
             py::arg("bank") = "sincos-m2d2", py::arg("m") = 2, py::arg("d") = 2, py::arg("H") = 0.4,
             py::arg("n") = 64, py::arg("T") = 1.0, py::arg("y0") = py::none(), py::arg("scale") = 1.0,
             py::arg("p") = py::none())
        .def_property_readonly("n", [](const Scheme& s) { return s.cfg.grid.n; })
        .def_property_readonly("H", [](const Scheme& s) { return s.cfg.hp.H; })
        .def_property_readonly("p", [](const Scheme& s) { return s.cfg.hp.p; })
        .def("noise",
             [](const Scheme& s, std::uint64_t seed) {
                 return to_array(sample_fbm(s.cfg.grid, s.cfg.hp.H, s.cfg.vf.d, seed));
             },
             py::arg("seed"))
        .def("run", [](const Scheme& s, const Array& x) { return to_array(euler_run(s.cfg, s.path(x))); },
             py::arg("x"))
        .def("directional_derivative",
             [](const Scheme& s, const Array& x, const Array& h, int L) {
                 GridPath xp = s.path(x);
                 return to_list(directional_derivative_run(L, s.cfg, euler_run(s.cfg, xp), xp, s.path(h)));
             },
             py::arg("x"), py::arg("h"), py::arg("L"))
        .def("fd_oracle",
             [](const Scheme& s, const Array& x, const Array& h, int L, double eps) {
                 return to_array(fd_oracle(L, s.cfg, s.path(x), s.path(h), eps));
             },
             py::arg("x"), py::arg("h"), py::arg("L"), py::arg("eps") = 1e-4)
        .def("xi",
             [](const Scheme& s, const Array& x, const Array& b, int N) {
                 GridPath xp = s.path(x);
                 return to_list(xi_run(N, s.cfg, euler_run(s.cfg, xp), xp, s.path(b)).levels);
             },
             py::arg("x"), py::arg("b"), py::arg("N"))
        .def("convergence",
             [](const Scheme& s, const std::vector<std::size_t>& levels, const std::vector<std::uint64_t>& seeds,
                int threads) {
                 SchemeConfig cfg = s.cfg;
                 if (!levels.empty()) cfg.grid = Grid(levels.back(), s.cfg.grid.T);
                 ConvergenceReport r;
                 {
                     py::gil_scoped_release release;
                     r = coupled_refinement_errors(cfg, levels, seeds, threads);
                 }
                 py::dict d;
                 d["levels"] = r.levels;
                 d["rms_vs_finest"] = r.rms_vs_finest;
                 d["rms_consecutive"] = r.rms_consecutive;
                 d["rate"] = r.rate;
                 d["rate_stderr"] = r.rate_stderr;
                 return d;
             },
             py::arg("levels"), py::arg("seeds"), py::arg("threads") = 1)
        .def("ledger",
             [](const Scheme& s, int N) {
                 auto l = build_ledger(s.cfg.vf, N, s.cfg.hp.p);
                 py::dict d;
                 d["C0"] = l.C0;
                 d["Kmu"] = l.Kmu;
                 d["K1"] = l.K1;
                 d["K2"] = l.K2;
                 d["K3"] = l.K3;
                 d["K4"] = l.K4;
                 d["alpha"] = l.alpha;
                 return d;
             },
             py::arg("N"))
        .def("bound_check",
             [](const Scheme& s, const Array& x, const Array& b, int L, double K) {
                 GridPath xp = s.path(x), bp = s.path(b);
                 auto xi = xi_run(L, s.cfg, euler_run(s.cfg, xp), xp, bp);
                 auto ledger = build_ledger(s.cfg.vf, L, s.cfg.hp.p);
                 LiftedNoise nz = lift_noise(xp, bp, s.cfg.hp.H);
                 ControlOmega om(nz, s.cfg.hp.p);
                 auto r = bound_check(L, xi, nz, greedy_partition(om, ledger.alpha), om, ledger, K, s.cfg);
                 py::dict d;
                 d["lhs"] = r.lhs;
                 d["log_rho"] = r.log_rho;
                 d["omega_total"] = r.omega_total;
                 d["intervals"] = py::make_tuple(r.s0, r.s1, r.s2);
                 d["pairs_checked"] = r.pairs_checked;
                 d["max_defect_ratio"] = r.max_defect_ratio;
                 d["K2"] = r.K2;
                 d["defect_ok"] = r.defect_ok;
                 d["delta_small_enough"] = r.delta_small_enough;
                 return d;
             },
             py::arg("x"), py::arg("b"), py::arg("L"), py::arg("K") = 1.0);
}
