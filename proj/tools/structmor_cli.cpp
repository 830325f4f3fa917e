// Command-line front end: load JSON models, run reductions, compute error
// norms, couple subsystems, and rebuild the coupled-beam benchmark.
//
// Exit codes: 0 success, 1 I/O error, 2 method-precondition failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "structmor/structmor.hpp"

namespace fs = std::filesystem;
using namespace structmor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitPrecondition = 2;

void print_error(const std::string& kind, const std::string& message) {
  json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

std::vector<Index> parse_orders(const std::string& txt) {
  std::vector<Index> out;
  std::stringstream ss(txt);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(static_cast<Index>(std::stol(item)));
    } catch (const std::exception&) {
      throw PreconditionError("cannot parse order list '" + txt + "'");
    }
  }
  if (out.empty()) throw PreconditionError("empty order list");
  for (Index r : out)
    if (r < 1) throw PreconditionError("orders must be positive");
  return out;
}

struct LoadedNetwork {
  SubsystemSet set;
  InterconnectionTopology topo;
  std::vector<Index> file_orders;
};

LoadedNetwork load_network(const std::string& topology_path) {
  TopologyFile tf = load_topology(topology_path);
  LoadedNetwork net;
  net.topo = tf.topo;
  net.file_orders = tf.orders;
  const fs::path base = fs::path(topology_path).parent_path();
  for (const auto& rel : tf.subsystem_paths) {
    fs::path p(rel);
    if (p.is_relative()) p = base / p;
    net.set.subsystems.push_back(load_model(p.string()));
  }
  return net;
}

json norm_report_json(const NormReport& rep) {
  json j;
  j["h2"] = json_number(rep.h2);
  j["linf"] = json_number(rep.linf);
  j["linf_omega"] = json_number(rep.linf_omega);
  j["grid"] = {{"evaluations", rep.grid.evaluations},
               {"refinement_depth", rep.grid.refinement_depth}};
  return j;
}

int cmd_reduce(const std::string& method, const std::string& model_path,
               const std::string& topology_path, const std::string& orders_txt,
               const std::string& mg_variant, const std::string& pibt_variant,
               const std::string& out_dir, bool any_storage) {
  StorageOptions sopts;
  sopts.minimal = !any_storage;

  if (method == "lyapbt" || method == "prbt" || method == "mgbt") {
    if (model_path.empty()) throw PreconditionError("--model is required for " + method);
    const StateSpace sys = load_model(model_path);
    const std::vector<Index> orders = parse_orders(orders_txt);
    if (orders.size() != 1) throw PreconditionError(method + " takes a single order");
    ReductionResult red;
    if (method == "lyapbt")
      red = reduce_lyap_bt(sys, orders[0]);
    else if (method == "prbt")
      red = reduce_pr_bt(sys, orders[0], sopts);
    else
      red = reduce_mg_bt(sys, orders[0],
                         mg_variant == "piq" ? MixedGramianVariant::PiQ : MixedGramianVariant::PXi,
                         sopts);
    fs::create_directories(out_dir);
    save_json_file(reduction_to_json(red), (fs::path(out_dir) / "reduced_model.json").string());
    std::cout << "reduced order " << red.kept_order << " of " << red.gamma.size() << "; gamma tail";
    for (Index i = 0; i < red.discarded_gamma.size(); ++i)
      std::cout << " " << format_sig6(red.discarded_gamma(i));
    std::cout << "\n";
    for (const auto& w : red.warnings) std::cout << "warning: " << w << "\n";
    return kExitOk;
  }

  if (method == "isbt" || method == "pibt") {
    if (topology_path.empty()) throw PreconditionError("--topology is required for " + method);
    LoadedNetwork net = load_network(topology_path);
    std::vector<Index> orders =
        orders_txt.empty() ? net.file_orders : parse_orders(orders_txt);
    if (orders.empty()) throw PreconditionError("orders missing (flag --orders or topology file)");

    json certificates = json::array();
    SubsystemSet reduced;
    StateSpace coupled;
    if (method == "isbt") {
      IsbtResult res = reduce_isbt(net.set, net.topo, orders);
      reduced = std::move(res.reduced);
      coupled = std::move(res.coupled);
      for (const auto& w : res.warnings) std::cout << "warning: " << w << "\n";
    } else {
      PibtResult res = reduce_pibt(net.set, net.topo, orders,
                                   pibt_variant == "dual" ? PibtVariant::Dual : PibtVariant::Primal,
                                   sopts);
      reduced = std::move(res.reduced);
      coupled = std::move(res.coupled);
      for (size_t j = 0; j < res.subsystem_reports.size(); ++j) {
        json cj = certificate_to_json(res.subsystem_reports[j].certificate);
        cj["subsystem"] = j + 1;
        cj["truncated_storage_residual"] =
            json_number(res.subsystem_reports[j].truncated_storage_residual);
        certificates.push_back(std::move(cj));
      }
      json cc = certificate_to_json(res.coupled_certificate);
      cc["coupled"] = true;
      certificates.push_back(std::move(cc));
      for (const auto& w : res.warnings) std::cout << "warning: " << w << "\n";
    }

    fs::create_directories(out_dir);
    for (size_t j = 0; j < reduced.subsystems.size(); ++j) {
      const std::string name = "reduced_sub_" + std::to_string(j + 1) + ".json";
      save_json_file(model_to_json(reduced.subsystems[j]), (fs::path(out_dir) / name).string());
    }
    save_json_file(model_to_json(coupled), (fs::path(out_dir) / "reduced_coupled.json").string());
    if (!certificates.empty())
      save_json_file(certificates, (fs::path(out_dir) / "certificates.json").string());
    std::cout << "coupled order " << coupled.order() << " written to " << out_dir << "\n";
    return kExitOk;
  }

  throw PreconditionError("unknown method '" + method + "'");
}

int cmd_analyze(const std::string& model_path, const std::string& reference_path,
                const LinfOptions& lopts, const std::string& out_path) {
  const StateSpace ghat = load_model(model_path);
  const StateSpace g = load_model(reference_path);
  const NormReport rep = error_norms(g, ghat, lopts);
  std::cout << "h2   = " << format_sig6(rep.h2) << "\n";
  std::cout << "linf = " << format_sig6(rep.linf);
  if (std::isfinite(rep.linf) && std::isfinite(rep.linf_omega))
    std::cout << " at omega = " << format_sig6(rep.linf_omega) << " rad/s";
  std::cout << "\n";
  if (!out_path.empty()) save_json_file(norm_report_json(rep), out_path);
  return kExitOk;
}

int cmd_couple(const std::string& topology_path, const std::string& out_path) {
  LoadedNetwork net = load_network(topology_path);
  const StateSpace coupled = couple(net.set, net.topo);
  save_json_file(model_to_json(coupled), out_path);
  std::cout << "coupled order " << coupled.order() << " written to " << out_path << "\n";
  return kExitOk;
}

int cmd_bench_beam(const BenchmarkOptions& opts, const std::string& out_dir, bool plots) {
  const BenchmarkReport rep = run_benchmark(opts);
  write_benchmark_report(rep, out_dir, plots);
  std::cout << benchmark_summary_table(rep);
  std::cout << "report written to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structmor: passivity-preserving balanced truncation for interconnected systems"};
  app.require_subcommand(1);
  unsigned long seed = 0;  // reserved for randomized workflows; kept for reproducible configs
  app.add_option("--seed", seed, "random seed recorded in the run configuration");

  auto* reduce = app.add_subcommand("reduce", "reduce a model or an interconnected network");
  std::string method, model_path, topology_path, orders_txt, out_dir = ".";
  std::string mg_variant = "pxi", pibt_variant = "primal";
  bool any_storage = false;
  reduce->add_option("--method", method, "lyapbt|prbt|mgbt|isbt|pibt")->required();
  reduce->add_option("--model", model_path, "model JSON (single-system methods)");
  reduce->add_option("--topology", topology_path, "topology JSON (isbt/pibt)");
  reduce->add_option("--orders,--order", orders_txt, "comma-separated reduction orders");
  reduce->add_option("--mg-variant", mg_variant, "pxi|piq (mgbt)");
  reduce->add_option("--variant", pibt_variant, "primal|dual (pibt)");
  reduce->add_option("--out", out_dir, "output directory");
  reduce->add_flag("--any-storage", any_storage,
                   "accept any feasible storage matrix instead of the minimal one");

  auto* analyze = app.add_subcommand("analyze", "error norms between two models");
  std::string a_model, a_ref, a_out;
  LinfOptions lopts;
  analyze->add_option("--model", a_model, "model JSON")->required();
  analyze->add_option("--reference", a_ref, "reference model JSON")->required();
  analyze->add_option("--f-min", lopts.f_min, "grid start (Hz)");
  analyze->add_option("--f-max", lopts.f_max, "grid end (Hz)");
  analyze->add_option("--points", lopts.points, "grid point count");
  analyze->add_option("--refine-tol", lopts.refine_tol, "refinement tolerance");
  analyze->add_option("--out", a_out, "norm report JSON path");

  auto* couple_cmd = app.add_subcommand("couple", "assemble the interconnected system");
  std::string c_topo, c_out = "coupled.json";
  couple_cmd->add_option("--topology", c_topo, "topology JSON")->required();
  couple_cmd->add_option("--out", c_out, "coupled model JSON path");

  auto* bench = app.add_subcommand("bench-beam", "run the coupled-beam benchmark");
  BenchmarkOptions bopts;
  std::string b_orders = "12,12", b_methods = "mgbt,isbt,pibt", b_out = "bench-report";
  bool plots = false, skip_fom_cert = false;
  bench->add_option("--orders", b_orders, "per-beam reduced orders");
  bench->add_option("--methods", b_methods, "subset of mgbt,isbt,pibt");
  bench->add_option("--elements", bopts.n_elements, "elements per beam");
  bench->add_option("--out", b_out, "report directory");
  bench->add_option("--step-dt", bopts.step_dt, "step-response sample time (s)");
  bench->add_option("--step-t-end", bopts.step_t_end, "step-response horizon (s)");
  bench->add_flag("--plots", plots, "emit SVG plots");
  bench->add_flag("--skip-fom-certificate", skip_fom_cert,
                  "skip the fresh LMI feasibility solve on the full model");

  CLI11_PARSE(app, argc, argv);

  try {
    if (reduce->parsed())
      return cmd_reduce(method, model_path, topology_path, orders_txt, mg_variant, pibt_variant,
                        out_dir, any_storage);
    if (analyze->parsed()) return cmd_analyze(a_model, a_ref, lopts, a_out);
    if (couple_cmd->parsed()) return cmd_couple(c_topo, c_out);
    if (bench->parsed()) {
      bopts.orders = parse_orders(b_orders);
      bopts.methods.clear();
      std::stringstream ss(b_methods);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item == "mgbt")
          bopts.methods.push_back(ReductionMethod::MGBT);
        else if (item == "isbt")
          bopts.methods.push_back(ReductionMethod::ISBT);
        else if (item == "pibt")
          bopts.methods.push_back(ReductionMethod::PIBT);
        else
          throw PreconditionError("unknown benchmark method '" + item + "'");
      }
      bopts.certify_fom = !skip_fom_cert;
      return cmd_bench_beam(bopts, b_out, plots);
    }
  } catch (const IoError& e) {
    print_error("io", e.what());
    return kExitIo;
  } catch (const DimensionError& e) {
    print_error("dimension", e.what());
    return kExitPrecondition;
  } catch (const InfeasibleError& e) {
    print_error("infeasible", e.what());
    return kExitPrecondition;
  } catch (const PreconditionError& e) {
    print_error("precondition", e.what());
    return kExitPrecondition;
  } catch (const NumericalError& e) {
    print_error("numerical", e.what());
    return kExitPrecondition;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitPrecondition;
  }
  return kExitOk;
}
