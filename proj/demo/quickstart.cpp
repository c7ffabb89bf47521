// Build a POD and a POD-DEIM reduced model of the semilinear heat equation
// on a small grid and compare both with the full-order trajectory.

#include <iostream>

#include "rmor/rmor.hpp"

int main()
{
    using namespace rmor;

    const Grid2d  grid(20);
    ParabolicSpec spec;
    const Index   m  = 200;
    const double  dt = spec.final_time / static_cast< double >(m - 1);

    const SnapshotPair snaps = generate_snapshots_parabolic(grid, spec, dt, m);
    const auto         fom   = build_parabolic_fom(grid, spec);

    const PodBasis pod = pod_basis(snaps.states, 10);
    std::cout << "energy in 10 modes: " << energy_ratio(singular_values(snaps.states.data()), 10) << "\n";

    const ReducedModel rom   = project_model(fom, pod.modes);
    const Trajectory   traj  = integrate_steps(rom, dt, m - 1);
    const double       e_pod = rel_frobenius_error(snaps.states.data(), lift(pod.modes, traj.states));

    const PodBasis     nl     = pod_basis(snaps.nonlinear, 10);
    const DeimOperator deim   = build_deim(nl.modes);
    const ReducedModel hyper  = project_model(fom, pod.modes, deim);
    const Trajectory   traj_d = integrate_steps(hyper, dt, m - 1);
    const double       e_deim = rel_frobenius_error(snaps.states.data(), lift(pod.modes, traj_d.states));

    std::cout << "POD      relative error " << e_pod << "\n"
              << "POD-DEIM relative error " << e_deim << "  (DEIM constant " << deim.error_constant << ")\n";
    return 0;
}
