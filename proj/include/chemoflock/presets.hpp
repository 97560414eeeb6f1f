#pragma once

// Named experiment presets test1 ... test13 and their variants. Values the
// original runs leave unstated are listed under the `inferred` key.

#include <chemoflock/config.hpp>

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace chemoflock {

struct Preset {
  std::string name;
  std::string summary;
  KeyValues values;
};

namespace detail {

using Entries = std::initializer_list<std::pair<const char*, const char*>>;

inline KeyValues make_values(std::initializer_list<Entries> blocks) {
  KeyValues kv;
  for (const auto& block : blocks)
    for (const auto& [k, v] : block) kv.set(k, v);
  return kv;
}

// Phase grid shared by every kinetic run.
inline const Entries kinetic_grid = {
    {"grid.x_min", "-20"}, {"grid.x_max", "20"}, {"grid.dx", "0.01"}, {"grid.v_min", "-5"},
    {"grid.v_max", "5"},   {"grid.dv", "0.01"},  {"dt", "0.001"},
};

inline const Entries chemo_test3 = {
    {"params.eta", "1.4"},
    {"params.D", "1"},
    {"params.kappa", "0.01"},
    {"params.R", "0.1"},
};

inline const Entries two_bump_v = {
    {"initial.kind", "two_bump_v"},
    {"initial.v0", "3.5"},
    {"initial.sigma_x", "0.316227766016838"},
    {"initial.sigma_v", "0.707106781186548"},
    {"initial.scale", "0.5"},
};

inline const Entries monokinetic = {
    {"initial.kind", "monokinetic_gauss"},
    {"initial.x0", "-2"},
    {"initial.v0", "1.5"},
    {"initial.sigma_x", "0.447213595499958"},
    {"initial.sigma_v", "0.0316227766016838"},
};

inline const Entries two_bump_xv = {
    {"initial.kind", "two_bump_xv"},
    {"initial.x1", "-2"},
    {"initial.v1", "1.5"},
    {"initial.x2", "2"},
    {"initial.v2", "-2.5"},
    {"initial.sigma_x", "0.447213595499958"},
    {"initial.sigma_v", "0.707106781186548"},
    {"initial.scale", "1"},
};

inline const Entries euler_cosine = {
    {"scale", "euler"},
    {"grid.x_min", "-0.75"},
    {"grid.x_max", "0.75"},
    {"grid.n_x", "600"},
    {"params.beta", "0.5"},
    {"initial.kind", "cosine_density"},
    {"initial.c1", "1.0471975511965976"},
    {"T", "4"},
    {"snapshot_times", "0,1,2,3,4"},
};

inline const Entries euler_chemo = {
    {"params.D", "1"},
    {"params.kappa", "0.01"},
    {"params.R", "0.025"},
};

// Kinetic runs compared against the hydrodynamic model on the same x-interval.
inline const Entries compare_base = {
    {"scale", "compare"},
    {"euler.n_x", "600"},
    {"params.beta", "0.5"},
    {"params.D", "1"},
    {"params.kappa", "0.01"},
    {"params.R", "0.1"},
};

inline const char* const kinetic_inferred = "snapshot_times,particles.n,initial.scale";
inline const char* const compare_inferred =
    "grid.dx,grid.dv,dt,euler.n_x,params.beta,params.D,params.kappa,params.R";

inline std::vector<Preset> build_presets() {
  std::vector<Preset> p;
  auto add = [&](const char* name, const char* summary, std::initializer_list<Entries> blocks, const char* inferred,
                 const char* scale = nullptr) {
    KeyValues kv = make_values(blocks);
    kv.set("name", name);
    if (scale) kv.set("scale", scale);
    kv.set("inferred", inferred);
    p.push_back({name, summary, std::move(kv)});
  };

  const Entries t1 = {{"scale", "vlasov"}, {"T", "5"}, {"snapshot_times", "0,1,2.5,5"}, {"particles.n", "100"},
                      {"params.beta", "0.05"}};
  const Entries t2 = {{"params.beta", "0.95"}};
  const Entries no_align = {{"params.alignment", "false"}};
  add("test1", "kinetic flocking, beta = 0.05", {kinetic_grid, two_bump_v, t1}, kinetic_inferred);
  add("test1_particles", "agent flocking, beta = 0.05", {kinetic_grid, two_bump_v, t1}, kinetic_inferred, "particle");
  add("test2", "kinetic, beta = 0.95", {kinetic_grid, two_bump_v, t1, t2}, kinetic_inferred);
  add("test2_particles", "agents, beta = 0.95", {kinetic_grid, two_bump_v, t1, t2}, kinetic_inferred, "particle");
  add("test3", "kinetic, beta = 0.95 with chemotaxis", {kinetic_grid, two_bump_v, t1, t2, chemo_test3},
      kinetic_inferred);
  add("test3_particles", "agents, beta = 0.95 with chemotaxis", {kinetic_grid, two_bump_v, t1, t2, chemo_test3},
      kinetic_inferred, "particle");
  add("test4", "kinetic, chemotaxis only", {kinetic_grid, two_bump_v, t1, chemo_test3, no_align}, kinetic_inferred);
  add("test4_particles", "agents, chemotaxis only", {kinetic_grid, two_bump_v, t1, chemo_test3, no_align},
      kinetic_inferred, "particle");

  const char* euler_inferred = "grid.n_x,params.beta,snapshot_times";
  const char* euler_chemo_inferred = "grid.n_x,params.beta,snapshot_times,params.D,params.kappa,params.R";
  add("test5", "pressureless Euler, subcritical c2 = 0.2", {euler_cosine, {{"initial.c2", "0.2"}}}, euler_inferred);
  add("test5_sub", "pressureless Euler, subcritical c2 = 0.2", {euler_cosine, {{"initial.c2", "0.2"}}},
      euler_inferred);
  add("test5_super", "pressureless Euler, supercritical c2 = 0.5", {euler_cosine, {{"initial.c2", "0.5"}}},
      euler_inferred);
  add("test6", "Euler with chemotaxis, c2 = 0.2, eta = 1",
      {euler_cosine, euler_chemo, {{"initial.c2", "0.2"}, {"params.eta", "1"}}}, euler_chemo_inferred);
  add("test6_super", "Euler with chemotaxis, c2 = 0.5, eta = 1",
      {euler_cosine, euler_chemo, {{"initial.c2", "0.5"}, {"params.eta", "1"}}}, euler_chemo_inferred);
  add("test6_damped", "Euler with damping, c2 = 0.5, alpha = 1",
      {euler_cosine, {{"initial.c2", "0.5"}, {"params.alpha", "1"}}}, euler_inferred);

  const Entries t7 = {{"T", "2"}, {"snapshot_times", "0,2"}, {"compare.epsilons", "0"}};
  add("test7", "monokinetic data, kinetic vs Euler", {kinetic_grid, compare_base, monokinetic, t7}, compare_inferred);
  add("test7_chemo", "monokinetic data with chemotaxis",
      {kinetic_grid, compare_base, monokinetic, t7, {{"params.eta", "0.2"}}}, compare_inferred);
  add("test7_damped", "monokinetic data with chemotaxis and damping",
      {kinetic_grid, compare_base, monokinetic, t7, {{"params.eta", "0.2"}, {"params.alpha", "2"}}},
      compare_inferred);
  add("test8", "two-bump data, kinetic vs Euler",
      {kinetic_grid, compare_base, two_bump_v, {{"T", "3"}, {"snapshot_times", "0,1,2,3"}, {"compare.epsilons", "0"}}},
      compare_inferred);
  const Entries t9 = {{"T", "7"}, {"snapshot_times", "0,0.5,1,7"}, {"compare.epsilons", "0"}, {"params.eta", "3"}};
  add("test9", "two-bump data with chemotaxis", {kinetic_grid, compare_base, two_bump_v, t9}, compare_inferred);
  add("test9_damped", "two-bump data with chemotaxis and damping",
      {kinetic_grid, compare_base, two_bump_v, t9, {{"params.alpha", "0.8"}}}, compare_inferred);
  add("test10", "two-bump data, chemotaxis only",
      {kinetic_grid, compare_base, two_bump_v,
       {{"T", "3"}, {"snapshot_times", "0,0.5,2,3"}, {"compare.epsilons", "0"}, {"params.eta", "3.4"}}, no_align},
      compare_inferred);

  const Entries t11 = {{"T", "2"}, {"snapshot_times", "0,1,1.5,2"}, {"params.eta", "0.2"}};
  add("test11", "monokinetic data, Euler with pressure",
      {kinetic_grid, compare_base, monokinetic, t11, {{"compare.epsilons", "0.002,0.01,0.05"}}}, compare_inferred);
  add("test11_opt", "monokinetic data, optimal pressure coefficient",
      {kinetic_grid, compare_base, monokinetic, t11,
       {{"search.times", "1,1.5,2"}, {"search.lo", "0"}, {"search.hi", "0.05"}, {"search.tol", "1e-3"}}},
      compare_inferred);

  const Entries t12 = {{"T", "4"}, {"snapshot_times", "0,1,2,4"}, {"params.eta", "3"}};
  const Entries search12 = {{"search.times", "1,2,4"}, {"search.lo", "0"}, {"search.hi", "5"}, {"search.tol", "1e-3"}};
  const std::string search_inferred = std::string(compare_inferred) + ",search.hi";
  add("test12", "two-bump xv data, Euler with pressure",
      {kinetic_grid, compare_base, two_bump_xv, t12, {{"compare.epsilons", "0,4.206"}}}, compare_inferred);
  add("test12_opt", "two-bump xv data, optimal pressure coefficient",
      {kinetic_grid, compare_base, two_bump_xv, t12, search12}, search_inferred.c_str());
  add("test13", "two-bump xv data, pressure and damping",
      {kinetic_grid, compare_base, two_bump_xv, t12, {{"params.alpha", "1"}, {"compare.epsilons", "0,3.204"}}},
      compare_inferred);
  add("test13_opt", "two-bump xv data with damping, optimal pressure coefficient",
      {kinetic_grid, compare_base, two_bump_xv, t12, {{"params.alpha", "1"}}, search12}, search_inferred.c_str());
  return p;
}

}  // namespace detail

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = detail::build_presets();
  return all;
}

inline const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw Error("unknown preset '" + name + "'");
}

/// Preset values with `key=value` overrides applied, parsed and validated.
inline ExperimentConfig preset_config(const std::string& name, const std::vector<std::string>& overrides = {}) {
  KeyValues kv = find_preset(name).values;
  apply_overrides(kv, overrides);
  return parse_config(kv);
}

}  // namespace chemoflock
