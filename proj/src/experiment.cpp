#include "bdgskin/experiment.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <limits>
#include <tuple>

#include <fmt/format.h>

#include "bdgskin/greens.hpp"
#include "bdgskin/impurity.hpp"
#include "bdgskin/io.hpp"
#include "bdgskin/nonbloch.hpp"
#include "bdgskin/spectral.hpp"
#include "json.hpp"

#ifndef BDGSKIN_VERSION
#define BDGSKIN_VERSION "0.0.0"
#endif

namespace bdgskin {

std::string_view tool_version() { return BDGSKIN_VERSION; }

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class RunWriter {
 public:
  explicit RunWriter(RunManifest& m) : m_(m) {}

  void write(const std::string& name, const std::vector<std::string>& columns,
             const CsvTable& table) {
    write_atomic(m_.directory / name, table.str());
    m_.files.push_back({name, columns, table.rows()});
  }

  void write(const std::string& name, std::vector<std::string> columns,
             const std::function<void(CsvTable&)>& fill) {
    CsvTable t(columns);
    fill(t);
    write(name, columns, t);
  }

 private:
  RunManifest& m_;
};

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json config_json(const ExperimentConfig& c) {
  json j;
  j["analysis"] = std::string(to_string(c.analysis));
  j["out_dir"] = c.out_dir;
  j["model"] = {{"omega0", complex_json(c.model.omega0)}, {"j_x", complex_json(c.model.j_x)},
                {"j_y", complex_json(c.model.j_y)},       {"j_xy", complex_json(c.model.j_xy)},
                {"delta0", complex_json(c.model.delta0)}, {"delta_x", complex_json(c.model.delta_x)}};
  json lat = {{"shape", c.lattice.shape}};
  if (c.lattice.shape == "oblique") {
    lat["side"] = c.lattice.side;
    lat["tilt_deg"] = c.lattice.tilt_deg;
  } else {
    lat["lx"] = c.lattice.lx;
    lat["ly"] = c.lattice.ly;
  }
  lat["bc_x"] = c.lattice.bc_x == Boundary::Open ? "open" : "periodic";
  lat["bc_y"] = c.lattice.bc_y == Boundary::Open ? "open" : "periodic";
  j["lattice"] = lat;
  json onsite = json::array(), hopping = json::array();
  for (const auto& i : c.impurities.onsite) onsite.push_back({i.site.x, i.site.y, i.v});
  for (const auto& h : c.impurities.hopping)
    hopping.push_back({h.site_a.x, h.site_a.y, h.site_b.x, h.site_b.y, h.t_p});
  j["impurities"] = {{"onsite", onsite}, {"hopping", hopping}};
  const auto& o = c.options;
  json opt;
  opt["epsilon"] = o.epsilon ? json(*o.epsilon) : json(nullptr);
  json energies = json::array();
  for (auto e : o.energies) energies.push_back(complex_json(e));
  opt["energies"] = energies;
  opt["target_energy"] = o.target_energy ? complex_json(*o.target_energy) : json(nullptr);
  opt["ky_points"] = o.ky_points;
  opt["theta_points"] = o.theta_points;
  opt["fd_bins"] = o.fd_bins;
  opt["margin_min"] = o.margin_min;
  opt["fit_first"] = o.fit_first;
  opt["fit_last"] = o.fit_last;
  j["options"] = opt;
  return j;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m) {
  json j;
  j["schema"] = "bdgskin-run/1";
  j["tool"] = {{"name", "bdgskin"}, {"version", std::string(tool_version())}};
  j["created_utc"] = utc_now();
  j["wall_time_s"] = m.wall_seconds;
  j["config"] = config_json(m.config);
  j["config_toml"] = emit_config(m.config);
  json files = json::array();
  for (const auto& f : m.files)
    files.push_back({{"name", f.name}, {"columns", f.columns}, {"rows", f.rows}});
  j["files"] = files;
  json summary = json::object();
  for (const auto& [k, v] : m.summary) summary[k] = std::isfinite(v) ? json(v) : json(nullptr);
  j["summary"] = summary;
  write_atomic(m.directory / "manifest.json", j.dump(2) + "\n");
}

void spectrum_table(RunWriter& w, const std::string& name, const Spectrum& s,
                    const std::vector<double>* fd) {
  std::vector<std::string> cols{"index", "re_E", "im_E"};
  if (fd) cols.insert(cols.end(), {"fractal_dim", "residual"});
  w.write(name, cols, [&](CsvTable& t) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const cplx e = s.eigenvalues(static_cast<Eigen::Index>(i));
      t.row().add(i).add(e.real()).add(e.imag());
      if (fd) t.add((*fd)[i]).add(s.residuals[i]);
    }
  });
}

void analyze_spectrum(const ExperimentConfig& c, RunManifest& m, bool with_fd_outputs) {
  RunWriter w(m);
  const auto lat = c.lattice.build();
  const auto op = assemble_bdg(c.model, lat);
  const Spectrum s = diagonalize(op.m_dyn);
  std::vector<double> fd(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) fd[i] = fractal_dimension(s.vector(i), lat);
  spectrum_table(w, "spectrum.csv", s, &fd);

  std::size_t intermediate = 0;
  for (double d : fd) intermediate += (d > 1.0 && d < 2.0) ? 1 : 0;
  m.summary["states"] = static_cast<double>(s.size());
  m.summary["fd_fraction_intermediate"] = static_cast<double>(intermediate) / s.size();
  m.summary["ph_residual"] = ph_symmetry_residual(op);
  if (!with_fd_outputs) return;

  const int bins = c.options.fd_bins;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double d : fd) {
    const int b = std::clamp(static_cast<int>(std::floor(d / 2.0 * bins)), 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  w.write("fd_histogram.csv", {"bin_lo", "bin_hi", "count"}, [&](CsvTable& t) {
    for (int b = 0; b < bins; ++b)
      t.row().add(2.0 * b / bins).add(2.0 * (b + 1) / bins).add(counts[static_cast<std::size_t>(b)]);
  });

  if (!c.options.target_energy) return;
  const std::size_t k = s.nearest(*c.options.target_energy);
  const CVector psi = s.vector(k);
  const auto n = static_cast<Eigen::Index>(lat.size());
  w.write("eigvec.csv", {"x", "y", "re_psi_p", "im_psi_p", "re_psi_h", "im_psi_h", "density"},
          [&](CsvTable& t) {
            for (std::size_t i = 0; i < lat.size(); ++i) {
              const auto& st = lat.site(i);
              const cplx p = psi(static_cast<Eigen::Index>(i));
              const cplx h = psi(n + static_cast<Eigen::Index>(i));
              t.row().add(st.x).add(st.y).add(p.real()).add(p.imag()).add(h.real()).add(h.imag())
                  .add(std::norm(p) + std::norm(h));
            }
          });

  const auto layer = layer_density(psi, lat);
  const auto oriented = orient_from_accumulation_edge(layer);
  w.write("layer_density.csv", {"x", "P", "P_from_edge"}, [&](CsvTable& t) {
    for (std::size_t x = 0; x < layer.size(); ++x) t.row().add(x + 1).add(layer[x]).add(oriented[x]);
  });

  const int len = static_cast<int>(oriented.size());
  const FitWindow win = c.options.fit_first ? FitWindow{c.options.fit_first, c.options.fit_last}
                                            : default_fit_window(len);
  const auto fe = fit_decay(oriented, win, DecayModel::Exponential);
  const auto fp = fit_decay(oriented, win, DecayModel::PowerLaw);
  w.write("fits.csv", {"model", "slope", "intercept", "r_squared", "first", "last"},
          [&](CsvTable& t) {
            for (const auto* f : {&fe, &fp})
              t.row().add(f->model == DecayModel::Exponential ? "exponential" : "power_law")
                  .add(f->slope).add(f->intercept).add(f->r_squared).add(win.first).add(win.last);
          });
  const cplx e = s.eigenvalues(static_cast<Eigen::Index>(k));
  m.summary["target_re_E"] = e.real();
  m.summary["target_im_E"] = e.imag();
  m.summary["target_fractal_dim"] = fd[k];
  m.summary["target_r2_exponential"] = fe.r_squared;
  m.summary["target_r2_power_law"] = fp.r_squared;
}

void analyze_sensitivity(const ExperimentConfig& c, RunManifest& m, const RunOptions& ro) {
  RunWriter w(m);
  const auto lat = c.lattice.build();
  SensitivityOptions so;
  so.epsilon = c.options.epsilon;
  so.concurrent = ro.threads > 1;
  const auto r = run_sensitivity(c.model, lat, c.impurities, so);
  spectrum_table(w, "clean_spectrum.csv", r.clean, nullptr);
  spectrum_table(w, "perturbed_spectrum.csv", r.perturbed, nullptr);
  w.write("sensitivity.csv", {"kind", "re_E", "im_E"}, [&](CsvTable& t) {
    for (auto e : r.report.new_states) t.row().add("new").add(e.real()).add(e.imag());
    for (auto e : r.report.vanished_states) t.row().add("vanished").add(e.real()).add(e.imag());
  });
  w.write("epsilon_sweep.csv", {"epsilon", "new_states", "vanished_states"}, [&](CsvTable& t) {
    for (const auto& s : r.epsilon_sweep) t.row().add(s.epsilon).add(s.new_states).add(s.vanished_states);
  });
  m.summary["epsilon"] = r.report.epsilon;
  m.summary["new_states"] = static_cast<double>(r.report.new_states.size());
  m.summary["vanished_states"] = static_cast<double>(r.report.vanished_states.size());
  m.summary["displacement"] = r.displacement;
}

void analyze_greens(const ExperimentConfig& c, RunManifest& m) {
  RunWriter w(m);
  const auto lat = c.lattice.build();
  const auto sp = *SolvableParams::from_model(c.model);
  ResponseOptions opt;
  opt.margin_min = c.options.margin_min;
  ImpuritySpec single;
  single.onsite = {c.impurities.onsite.front()};
  const bool two = c.impurities.onsite.size() == 2;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> rho_single, rho_double;
  w.write("greens_scan.csv",
          {"E_re", "E_im", "rho_single", "rho_double", "xi_plus_re", "xi_plus_im", "xi_minus_re",
           "xi_minus_im", "spectrum_distance"},
          [&](CsvTable& t) {
            for (cplx e : c.options.energies) {
              const auto rs = response_spectral_radius(sp, lat, single, e, opt);
              const auto rd = two ? response_spectral_radius(sp, lat, c.impurities, e, opt) : rs;
              rho_single.push_back(rs.rho);
              rho_double.push_back(two ? rd.rho : nan);
              t.row().add(e.real()).add(e.imag()).add(rs.rho).add(rho_double.back())
                  .add(rd.xi_plus.real()).add(rd.xi_plus.imag()).add(rd.xi_minus.real())
                  .add(rd.xi_minus.imag()).add(rd.spectrum_distance);
            }
          });
  for (std::size_t i = 0; i < rho_single.size(); ++i) {
    m.summary[fmt::format("rho_single_{}", i)] = rho_single[i];
    m.summary[fmt::format("rho_double_{}", i)] = rho_double[i];
  }
}

// Analytic propagators between two centered sites half the cylinder apart, against direct
// inversion. The calibration factor comes from the first forward element.
void propagator_table(const ExperimentConfig& c, const SolvableParams& sp, RunWriter& w, RunManifest& m) {
  const int lx = c.lattice.lx, ly = c.lattice.ly;
  const auto lat = c.lattice.build();
  const auto blocks = block_transform(assemble_bdg(c.model, lat).m_dyn);
  const auto ky = cylinder_momenta(ly);
  const int sep = lx / 2;
  const int x1 = lx / 2 + 1 - sep / 2;
  const Site r1{x1, 1}, r2{x1 + sep, 1 + ly / 2};
  double scale = 0.0;

  w.write("propagators.csv",
          {"energy_index", "E_re", "E_im", "branch", "x_to", "y_to", "x_from", "y_from", "re_residue",
           "im_residue", "re_calibrated", "im_calibrated", "re_finite_chain", "im_finite_chain",
           "re_direct", "im_direct", "rel_err_residue", "rel_err_finite_chain"},
          [&](CsvTable& t) {
            for (std::size_t k = 0; k < c.options.energies.size(); ++k) {
              const cplx e = c.options.energies[k];
              for (Branch b : {Branch::Plus, Branch::Minus}) {
                Resolvent g(b == Branch::Plus ? blocks.m_p : blocks.m_m, e);
                for (auto [to, from] : {std::pair{r2, r1}, std::pair{r1, r2}}) {
                  const cplx direct = g.element(lat.require_index(to), lat.require_index(from));
                  const cplx bulk = residue_propagator(e, to, from, b, sp, ky);
                  const cplx chain = finite_chain_propagator(e, to, from, b, sp, lx, ky);
                  if (scale == 0.0) scale = calibration_factor(bulk, direct);
                  t.row().add(k).add(e.real()).add(e.imag()).add(b == Branch::Plus ? "plus" : "minus")
                      .add(to.x).add(to.y).add(from.x).add(from.y).add(bulk.real()).add(bulk.imag())
                      .add(scale * bulk.real()).add(scale * bulk.imag()).add(chain.real())
                      .add(chain.imag()).add(direct.real()).add(direct.imag())
                      .add(std::abs(bulk - direct) / std::abs(direct))
                      .add(std::abs(chain - direct) / std::abs(direct));
                }
              }
            }
          });
  m.summary["calibration_factor"] = scale;
}

void analyze_nonbloch(const ExperimentConfig& c, RunManifest& m) {
  RunWriter w(m);
  const auto sp = *SolvableParams::from_model(c.model);
  const auto ky = uniform_grid(static_cast<std::size_t>(c.options.ky_points));
  const auto theta = uniform_grid(static_cast<std::size_t>(c.options.theta_points));

  w.write("roots.csv",
          {"energy_index", "E_re", "E_im", "k_y", "abs_beta1_plus", "abs_beta2_plus",
           "abs_beta1_minus", "abs_beta2_minus", "ln_beta1_plus", "ln_beta2_plus",
           "ln_beta1_minus", "ln_beta2_minus"},
          [&](CsvTable& t) {
            for (std::size_t k = 0; k < c.options.energies.size(); ++k) {
              const cplx e = c.options.energies[k];
              for (const auto& r : root_trajectory(e, sp, ky))
                t.row().add(k).add(e.real()).add(e.imag()).add(r.k_y).add(r.abs_beta1_plus)
                    .add(r.abs_beta2_plus).add(r.abs_beta1_minus).add(r.abs_beta2_minus)
                    .add(std::log(r.abs_beta1_plus)).add(std::log(r.abs_beta2_plus))
                    .add(std::log(r.abs_beta1_minus)).add(std::log(r.abs_beta2_minus));
            }
          });

  w.write("mu_summary.csv",
          {"energy_index", "E_re", "E_im", "branch", "mu_max_1", "mu_min_2", "argmax_ky", "argmin_ky"},
          [&](CsvTable& t) {
            for (std::size_t k = 0; k < c.options.energies.size(); ++k) {
              const cplx e = c.options.energies[k];
              for (Branch b : {Branch::Plus, Branch::Minus}) {
                const auto mu = mu_extrema(e, b, sp, ky);
                const char* name = b == Branch::Plus ? "plus" : "minus";
                t.row().add(k).add(e.real()).add(e.imag()).add(name).add(mu.mu_max_1)
                    .add(mu.mu_min_2).add(mu.argmax_ky).add(mu.argmin_ky);
                m.summary[fmt::format("mu_max_1_{}_{}", name, k)] = mu.mu_max_1;
                m.summary[fmt::format("mu_min_2_{}_{}", name, k)] = mu.mu_min_2;
              }
            }
          });

  w.write("gbz.csv", {"branch", "k_y", "radius"}, [&](CsvTable& t) {
    for (Branch b : {Branch::Plus, Branch::Minus})
      for (double k : ky) t.row().add(b == Branch::Plus ? "plus" : "minus").add(k).add(gbz_radius(k, b, sp));
  });

  const auto sigma = cylinder_spectrum(sp, ky, theta);
  w.write("cylinder_spectrum.csv", {"re_E", "im_E"}, [&](CsvTable& t) {
    for (cplx e : sigma) t.row().add(e.real()).add(e.imag());
  });

  const auto& lc = c.lattice;
  if (lc.shape == "rectangle" && lc.bc_x == Boundary::Open && lc.bc_y == Boundary::Periodic && lc.lx >= 3)
    propagator_table(c, sp, w, m);
}

}  // namespace

RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                const RunOptions& options) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunManifest m;
  m.config = config;
  m.config.out_dir = out_dir.string();
  m.directory = out_dir;
  fs::create_directories(out_dir);

  switch (config.analysis) {
    case Analysis::Spectrum: analyze_spectrum(config, m, false); break;
    case Analysis::Fd: analyze_spectrum(config, m, true); break;
    case Analysis::Sensitivity: analyze_sensitivity(config, m, options); break;
    case Analysis::Greens: analyze_greens(config, m); break;
    case Analysis::Nonbloch: analyze_nonbloch(config, m); break;
  }

  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(m);
  return m;
}

namespace {

ExperimentConfig base(Analysis a, const ModelParams& p) {
  ExperimentConfig c;
  c.analysis = a;
  c.model = p;
  return c;
}

LatticeConfig rect(int lx, int ly, Boundary bx, Boundary by) {
  LatticeConfig l;
  l.lx = lx;
  l.ly = ly;
  l.bc_x = bx;
  l.bc_y = by;
  return l;
}

LatticeConfig oblique(int side, double tilt) {
  LatticeConfig l;
  l.shape = "oblique";
  l.side = side;
  l.tilt_deg = tilt;
  return l;
}

ExperimentConfig from_preset(std::string_view name, int size) {
  const auto p = sensitivity_preset(name, size);
  auto c = base(Analysis::Sensitivity, p.params);
  c.lattice = rect(size, size, Boundary::Open, Boundary::Periodic);
  c.impurities = p.impurities;
  return c;
}

std::vector<FigurePanel> all_panels(Scale scale) {
  const int n = scale == Scale::Desk ? 20 : 50;
  const int cyl = scale == Scale::Desk ? 16 : 50;
  const auto m1 = skin_effect_params();
  const auto m2 = impurity_study_params();
  const auto open = Boundary::Open, per = Boundary::Periodic;
  std::vector<FigurePanel> out;

  auto fd_panel = [&](const std::string& id, const ModelParams& p, LatticeConfig lat, cplx target) {
    auto c = base(Analysis::Fd, p);
    c.lattice = lat;
    c.options.target_energy = target;
    out.push_back({id, c});
  };
  fd_panel("fig2a", m1, rect(n, n, open, open), {-0.97, 2.43});
  fd_panel("fig2e", m2, rect(n, n, open, open), {2.09, 9.23});
  fd_panel("fig2i", m1, oblique(n, 15.0), {-0.18, 3.18});
  fd_panel("fig2k", m1, oblique(n, 30.0), {-0.97, 2.77});
  for (auto [id, p] : {std::pair{"fig2a_pbc", m1}, std::pair{"fig2e_pbc", m2}}) {
    auto c = base(Analysis::Spectrum, p);
    c.lattice = rect(n, n, per, per);
    out.push_back({id, c});
  }

  for (auto [id, p, bx] : {std::tuple{"fig3a", m1, per}, std::tuple{"fig3b", m1, open},
                           std::tuple{"fig3e", m2, per}, std::tuple{"fig3f", m2, open}}) {
    auto c = base(Analysis::Spectrum, p);
    c.lattice = rect(n, n, bx, per);
    out.push_back({id, c});
  }
  for (const char* id : {"fig3c", "fig3d", "fig3g", "fig3h"}) out.push_back({id, from_preset(id, n)});
  {
    auto c = base(Analysis::Greens, m2);
    c.lattice = rect(cyl, cyl, open, per);
    c.impurities.onsite = {{{1, 1}, 0.01}, {{cyl, cyl / 2}, 0.01}};
    c.options.energies = {{0.85, 7.59}, {-2.12, -7.63}};
    out.push_back({"fig3h_response", c});
  }

  out.push_back({"fig4a", from_preset("fig4a", n)});
  out.push_back({"fig4b", from_preset("fig4b", n)});
  {
    auto c = from_preset("fig4a", n);
    c.impurities.hopping = {{{1, 1}, {2, 1}, 0.01}};
    out.push_back({"fig4_nearest", c});
  }

  for (auto [id, e] : {std::pair{"fig5a", cplx{0.85, 7.59}}, std::pair{"fig5b", cplx{-2.12, -7.63}}}) {
    auto c = base(Analysis::Nonbloch, m2);
    c.lattice = rect(cyl, cyl, open, per);
    c.options.energies = {e};
    out.push_back({id, c});
  }
  return out;
}

}  // namespace

std::vector<FigurePanel> figure_panels(std::string_view figure_id, Scale scale) {
  std::vector<FigurePanel> out;
  if (figure_id.size() >= 4 && figure_id.starts_with("fig"))
    for (auto& p : all_panels(scale))
      if (p.id.starts_with(figure_id) &&
          (p.id.size() == figure_id.size() || !std::isdigit(static_cast<unsigned char>(p.id[figure_id.size()]))))
        out.push_back(std::move(p));
  if (out.empty())
    throw DomainError(fmt::format(
        "unknown figure id '{}' (fig2, fig3, fig4, fig5, or a panel such as fig3h)", figure_id));
  return out;
}

ReproduceResult reproduce(std::string_view figure_id, Scale scale, const std::filesystem::path& out_dir,
                          const RunOptions& options) {
  const auto panels = figure_panels(figure_id, scale);
  const auto start = std::chrono::steady_clock::now();
  ReproduceResult r;
  r.directory = out_dir;
  fs::create_directories(out_dir);
  for (const auto& p : panels) r.panels.push_back(run(p.config, out_dir / p.id, options));

  json files = json::array();
  std::vector<std::pair<std::string, const RunManifest*>> nonbloch;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    files.push_back({{"panel", panels[i].id}, {"manifest", panels[i].id + "/manifest.json"}});
    if (panels[i].config.analysis == Analysis::Nonbloch) nonbloch.emplace_back(panels[i].id, &r.panels[i]);
  }

  json j;
  j["schema"] = "bdgskin-reproduce/1";
  j["tool"] = {{"name", "bdgskin"}, {"version", std::string(tool_version())}};
  j["figure"] = std::string(figure_id);
  j["scale"] = scale == Scale::Desk ? "desk" : "full";
  j["created_utc"] = utc_now();
  j["panels"] = files;

  if (!nonbloch.empty()) {
    CsvTable t({"panel", "E_re", "E_im", "branch", "mu_max_1", "mu_min_2", "sign_mu_max_1", "sign_mu_min_2"});
    for (const auto& [id, m] : nonbloch) {
      const cplx e = m->config.options.energies.front();
      for (const char* b : {"plus", "minus"}) {
        const double a = m->summary.at(fmt::format("mu_max_1_{}_0", b));
        const double z = m->summary.at(fmt::format("mu_min_2_{}_0", b));
        t.row().add(id).add(e.real()).add(e.imag()).add(b).add(a).add(z)
            .add(a > 0 ? "+" : "-").add(z > 0 ? "+" : "-");
      }
    }
    write_atomic(out_dir / "mu_signs.csv", t.str());
    j["tables"] = json::array({"mu_signs.csv"});
  }
  j["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_atomic(out_dir / "manifest.json", j.dump(2) + "\n");
  return r;
}

}  // namespace bdgskin
