#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "somlab/categorical.hpp"
#include "somlab/experiments.hpp"
#include "somlab/meanfield.hpp"
#include "somlab/order_analysis.hpp"
#include "somlab/quantization.hpp"

namespace py = pybind11;
using namespace somlab;

namespace {

StimuliDistribution make_distribution(const std::string& kind,
                                      const std::vector<std::pair<double, double>>& bounds,
                                      const std::vector<Vec>& points) {
    if (kind == "uniform") {
        std::vector<Interval> axes;
        for (const auto& [lo, hi] : bounds) axes.push_back({lo, hi});
        if (axes.empty()) axes.push_back({0.0, 1.0});
        return StimuliDistribution::uniform_box(std::move(axes));
    }
    if (kind == "discrete") return StimuliDistribution::discrete(points);
    return make_named_density(kind);
}

GainSchedule make_schedule(const std::string& kind, double a, double b, double gamma) {
    if (kind == "constant") return GainSchedule::constant(a);
    if (kind == "power") return GainSchedule::power(a, b, gamma);
    if (kind == "log") return GainSchedule::log_rule(a);
    throw ConfigError("schedule kind must be constant, power or log");
}

py::dict equilibrium_dict(const EquilibriumReport& eq) {
    py::dict d;
    d["state"] = eq.state.w;
    d["residual"] = eq.residual_inf;
    d["flow_eigs_real"] = eq.flow_eigs_real;
    d["max_real_eig_flow"] = eq.max_real_eig_flow;
    d["cooperative"] = eq.cooperative;
    d["stable"] = eq.verdict == StabilityVerdict::Stable;
    return d;
}

py::dict report_dict(const QuantizerReport& rep) {
    py::dict d;
    d["state"] = rep.state.w;
    d["distortion"] = rep.distortion;
    d["cell_masses"] = rep.cell_masses;
    d["scaled_distortion"] = rep.scaled_distortion;
    if (rep.fdist_sq) d["fdist_sq"] = *rep.fdist_sq;
    return d;
}

py::list map_list(const ModalityMap& map) {
    py::list out;
    for (const auto& e : map.entries) {
        const auto [r, c] = map.lattice.coords(e.unit);
        out.append(py::make_tuple(e.label, e.question, r, c));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_somlab, m) {
    m.doc() = "SOM process, mean-field analysis, quantization and categorical maps";

    py::register_exception<Error>(m, "SomlabError");

    py::class_<LatticeSpec>(m, "Lattice")
        .def_static("string1d", &LatticeSpec::string1d, py::arg("n"))
        .def_static("grid2d", &LatticeSpec::grid2d, py::arg("n1"), py::arg("n2"))
        .def("units", &LatticeSpec::units)
        .def("distance", &LatticeSpec::distance, py::arg("i"), py::arg("j"))
        .def("coords", &LatticeSpec::coords, py::arg("unit"));

    py::class_<NeighborhoodFunction>(m, "Neighborhood")
        .def_static("indicator0", &NeighborhoodFunction::indicator0)
        .def_static("indicator8", &NeighborhoodFunction::indicator8)
        .def_static("step", &NeighborhoodFunction::step, py::arg("k"))
        .def_static("from_table", &NeighborhoodFunction::from_table, py::arg("values"),
                    py::arg("name") = "table")
        .def("value", &NeighborhoodFunction::value, py::arg("distance"))
        .def("satisfies_h_lambda", &NeighborhoodFunction::satisfies_h_lambda, py::arg("n"));

    py::class_<StimuliDistribution>(m, "Stimuli")
        .def_static("make", &make_distribution, py::arg("kind") = "uniform",
                    py::arg("bounds") = std::vector<std::pair<double, double>>{},
                    py::arg("points") = std::vector<Vec>{})
        .def("dim", &StimuliDistribution::dim)
        .def("mean", &StimuliDistribution::mean)
        .def("h_mu_certified", &StimuliDistribution::h_mu_certified)
        .def("sample",
             [](const StimuliDistribution& mu, std::uint64_t seed, int count) {
                 RandomStream rng(seed);
                 std::vector<Vec> out;
                 out.reserve(static_cast<std::size_t>(count));
                 for (int i = 0; i < count; ++i) out.push_back(mu.sample(rng));
                 return out;
             },
             py::arg("seed"), py::arg("count") = 1);

    py::class_<GainSchedule>(m, "Gain")
        .def_static("make", &make_schedule, py::arg("kind"), py::arg("a"), py::arg("b") = 0.0,
                    py::arg("gamma") = 1.0)
        .def("gain", &GainSchedule::gain, py::arg("t"))
        .def_property_readonly("robbins_monro", &GainSchedule::robbins_monro);

    py::class_<NetworkState>(m, "State")
        .def_static("from_weights", &NetworkState::from_weights, py::arg("lattice"),
                    py::arg("dim"), py::arg("weights"))
        .def_property_readonly("weights", [](const NetworkState& s) { return s.w; })
        .def_property_readonly("time", [](const NetworkState& s) { return s.time; })
        .def_property_readonly("dim", [](const NetworkState& s) { return s.dim; })
        .def("units", &NetworkState::units);

    m.def("winner",
          [](const NetworkState& s, const Vec& x) { return winner(s, x); },
          py::arg("state"), py::arg("x"));

    m.def("som_step",
          [](const NetworkState& s, const Vec& x, double eps, const NeighborhoodFunction& nf) {
              return step(s, x, eps, nf);
          },
          py::arg("state"), py::arg("x"), py::arg("eps"), py::arg("neighborhood"));

    m.def("run_som",
          [](const LatticeSpec& lattice, const NeighborhoodFunction& nf,
             const StimuliDistribution& mu, const GainSchedule& sched, std::uint64_t steps,
             std::uint64_t seed, const std::string& init) {
              InitMode mode = InitMode::Random;
              if (init == "ordered") mode = InitMode::Ordered1d;
              else if (init == "grid-fpp") mode = InitMode::GridFpp;
              else if (init != "random") throw ConfigError("init must be random, ordered or grid-fpp");
              ProcessScenario sc{lattice, nf, mu, sched, mode, std::nullopt};
              RandomStream rng(seed);
              NetworkState s = sc.make_initial(rng);
              return run(std::move(s), mu, sched, nf, steps, rng).state;
          },
          py::arg("lattice"), py::arg("neighborhood"), py::arg("stimuli"), py::arg("gain"),
          py::arg("steps"), py::arg("seed"), py::arg("init") = "random");

    m.def("classify_1d",
          [](const NetworkState& s) { return ordering_name(classify_1d(s)); }, py::arg("state"));
    m.def("classify_fpp", &classify_fpp, py::arg("state"));

    m.def("evaluate_h",
          [](const LatticeSpec& lattice, const NeighborhoodFunction& nf,
             const StimuliDistribution& mu, const NetworkState& s) {
              return evaluate_h(MeanField::make(lattice, nf, mu), s);
          },
          py::arg("lattice"), py::arg("neighborhood"), py::arg("stimuli"), py::arg("state"));

    m.def("solve_equilibrium",
          [](const LatticeSpec& lattice, const NeighborhoodFunction& nf,
             const StimuliDistribution& mu, const NetworkState& initial, double tol) {
              return equilibrium_dict(solve_equilibrium(MeanField::make(lattice, nf, mu), initial, tol));
          },
          py::arg("lattice"), py::arg("neighborhood"), py::arg("stimuli"), py::arg("initial"),
          py::arg("tolerance") = 1e-10);

    m.def("uniform_equilibrium", &uniform_limit_linear_system, py::arg("n"),
          py::arg("neighborhood"));

    m.def("grid_state", &grid_state, py::arg("axis0"), py::arg("axis1"));

    m.def("distortion",
          [](const NetworkState& s, const StimuliDistribution& mu) {
              return distortion(s, mu).value;
          },
          py::arg("state"), py::arg("stimuli"));

    m.def("distortion_gradient",
          [](const NetworkState& s, const StimuliDistribution& mu) {
              return distortion_gradient(s, mu);
          },
          py::arg("state"), py::arg("stimuli"));

    m.def("optimal_quantizer_1d",
          [](int n, const StimuliDistribution& mu, double tol) {
              return report_dict(optimal_quantizer_1d(n, mu, tol));
          },
          py::arg("n"), py::arg("stimuli"), py::arg("tolerance") = 1e-12);

    m.def("zador_scan",
          [](const std::vector<int>& ns, const StimuliDistribution& mu, int restarts,
             std::uint64_t seed) {
              py::list rows;
              for (const auto& r : zador_scan(ns, mu, restarts, seed)) {
                  py::dict d;
                  d["n"] = r.n;
                  d["vn"] = r.vn;
                  d["scaled"] = r.scaled;
                  if (r.fdist_sq) d["fdist_sq"] = *r.fdist_sq;
                  rows.append(d);
              }
              return rows;
          },
          py::arg("ns"), py::arg("stimuli"), py::arg("restarts") = 20, py::arg("seed") = 1);

    m.def("quantize_integrate",
          [](const std::function<double(double)>& g, int n, const StimuliDistribution& mu) {
              return quantize_integrate1d(g, optimal_quantizer_1d(n, mu));
          },
          py::arg("g"), py::arg("n"), py::arg("stimuli"));

    m.def("korresp",
          [](const std::vector<std::vector<std::int64_t>>& counts,
             const std::vector<std::string>& row_labels,
             const std::vector<std::string>& col_labels, int grid, std::uint64_t steps,
             std::uint64_t seed) {
              std::vector<std::int64_t> flat;
              for (const auto& row : counts)
                  flat.insert(flat.end(), row.begin(), row.end());
              const auto table =
                  ContingencyTable::from_counts(std::move(flat), row_labels, col_labels);
              CategoricalConfig cc;
              cc.lattice = LatticeSpec::grid2d(grid, grid);
              cc.steps = steps;
              cc.seed = seed;
              return map_list(korresp_run(table, cc));
          },
          py::arg("counts"), py::arg("row_labels"), py::arg("col_labels"), py::arg("grid") = 7,
          py::arg("steps") = 20000, py::arg("seed") = 1);

    m.def("kacm",
          [](const std::vector<std::string>& questions,
             const std::vector<std::vector<std::string>>& answers, int grid, std::uint64_t steps,
             std::uint64_t seed) {
              ResponseTable rt;
              rt.questions = questions;
              rt.modality_labels.resize(questions.size());
              for (const auto& row : answers) {
                  if (row.size() != questions.size())
                      throw IngestionError("answer row length does not match the questions");
                  std::vector<int> idx(row.size());
                  for (std::size_t k = 0; k < row.size(); ++k) {
                      auto& labels = rt.modality_labels[k];
                      const auto it = std::find(labels.begin(), labels.end(), row[k]);
                      if (it == labels.end()) {
                          labels.push_back(row[k]);
                          idx[k] = static_cast<int>(labels.size()) - 1;
                      } else {
                          idx[k] = static_cast<int>(it - labels.begin());
                      }
                  }
                  rt.answers.push_back(std::move(idx));
              }
              CategoricalConfig cc;
              cc.lattice = LatticeSpec::grid2d(grid, grid);
              cc.steps = steps;
              cc.seed = seed;
              return map_list(kacm_run(build_burt(rt), cc));
          },
          py::arg("questions"), py::arg("answers"), py::arg("grid") = 7, py::arg("steps") = 20000,
          py::arg("seed") = 1);

#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "dev";
#endif
}
