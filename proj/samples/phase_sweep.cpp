// Copyright 2026 The fidwit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Walks the phase pair along a line in parameter space and, at each point,
// reports the best member of the W_G family and the value of a fidelity
// witness built on the closest maximally entangled state.

#include <cstdio>

#include "fidwit/fidwit.hpp"

int main() {
    using namespace fidwit;
    std::printf("%8s %8s %12s %10s %12s %10s\n", "phi1", "phi2", "min <W_G>", "theta*", "<W_opt>", "PPT ent");
    const int steps = 12;
    for (int k = 0; k <= steps; ++k) {
        const grav::PhasePair p(pi * k / steps, 0.3 * pi * k / steps);
        const PureState psi = grav::grav_state(p);
        const ThetaMinimum best = grav::minimize_over_theta(p);
        const FidelityWitness w = optimal_witness(psi);
        std::printf("%8.4f %8.4f %12.6f %10.4f %12.6f %10s\n", p.phi1, p.phi2, best.value, best.theta,
                    expectation(w.observable, psi), ppt_entangled(DensityOperator(psi)) ? "yes" : "no");
    }
    return 0;
}
