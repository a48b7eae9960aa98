#include <random>

#include <benchmark/benchmark.h>

#include "amflat/controller.hpp"
#include "amflat/flatness.hpp"
#include "amflat/oracle.hpp"
#include "amflat/reduced_dynamics.hpp"

namespace {

using namespace amflat;

struct Fixture {
  AMParams params = planar_two_link_model();
  ReducedState state;
  ControlInput input;
  ExtendedState extended;
  ExtendedInput extended_input;

  Fixture() {
    std::mt19937_64 rng(1);
    state = oracle::random_state(params, rng);
    input = oracle::random_input(params, rng);
    extended = ExtendedState{state, input.thrust, 0.3};
    extended_input = ExtendedInput::zero(params.k());
    extended_input.tau_L = input.tau_L;
    extended_input.tau_body = input.tau_body;
  }
};

void BM_MassMatrix(benchmark::State& st) {
  Fixture f;
  for (auto _ : st) benchmark::DoNotOptimize(mass_matrix(f.params, f.state.eta));
}
BENCHMARK(BM_MassMatrix);

void BM_ReducedDynamics(benchmark::State& st) {
  Fixture f;
  for (auto _ : st) benchmark::DoNotOptimize(reduced_dynamics(f.params, f.state, f.input));
}
BENCHMARK(BM_ReducedDynamics);

void BM_ExtendedDynamics(benchmark::State& st) {
  Fixture f;
  for (auto _ : st) benchmark::DoNotOptimize(extended_dynamics(f.params, f.extended, f.extended_input));
}
BENCHMARK(BM_ExtendedDynamics);

void BM_FlatOutputs(benchmark::State& st) {
  Fixture f;
  for (auto _ : st) {
    benchmark::DoNotOptimize(flat_outputs_from_state(f.params, f.extended, f.extended_input));
  }
}
BENCHMARK(BM_FlatOutputs);

void BM_InputsFromFlat(benchmark::State& st) {
  Fixture f;
  const FlatSignal sigma = flat_outputs_from_state(f.params, f.extended, f.extended_input);
  for (auto _ : st) benchmark::DoNotOptimize(inputs_from_flat(f.params, sigma));
}
BENCHMARK(BM_InputsFromFlat);

void BM_AuxiliaryDecomposition(benchmark::State& st) {
  Fixture f;
  for (auto _ : st) benchmark::DoNotOptimize(auxiliary_decomposition(f.params, f.extended));
}
BENCHMARK(BM_AuxiliaryDecomposition);

void BM_ClfQp(benchmark::State& st) {
  Fixture f;
  const Clf clf = Clf::build(f.params.k());
  FlatSignal ref = flat_outputs_from_state(f.params, f.extended, f.extended_input);
  ref.pe[0].x() += 0.3;
  for (auto _ : st) benchmark::DoNotOptimize(clf_qp_control(f.params, f.extended, ref, clf));
}
BENCHMARK(BM_ClfQp);

void BM_Care(benchmark::State& st) {
  const int k = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(Clf::build(k));
}
BENCHMARK(BM_Care)->Arg(1)->Arg(2)->Arg(4);

void BM_OracleAccel(benchmark::State& st) {
  Fixture f;
  const oracle::FullCoordinates x = oracle::full_from_reduced(f.params, f.state);
  for (auto _ : st) benchmark::DoNotOptimize(oracle::full_lagrangian_accel(f.params, x, f.input));
}
BENCHMARK(BM_OracleAccel);

}  // namespace

BENCHMARK_MAIN();
