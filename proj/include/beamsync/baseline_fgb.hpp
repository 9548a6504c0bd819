// SPDX-License-Identifier: Apache-2.0
//
// beamsync-sim: over-the-air phase and frequency synchronization between distributed APs
// Copyright (C) 2026 The beamsync-sim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BEAMSYNC_BASELINE_FGB_H
#define BEAMSYNC_BASELINE_FGB_H

#include "beamsync/freq_sync.hpp"
#include "beamsync/phase_sync.hpp"

#include <cstddef>
#include <utility>

namespace beamsync
{
    // Unitary DFT codebook; column k is beam k
    struct BeamGrid
    {
        std::size_t M = 0;
        CMat beams;
        CVec beam(std::size_t k) const { return beams.col(k); }
    };

    BeamGrid dft_beam_grid(std::size_t M);

    // argmax_k ||f_k^H Y||^2, lowest index on ties
    std::size_t fgb_select_beam(const CMat &Y, const BeamGrid &grid);

    // Exhaustive (k, l) maximizing |f_k^H G_e conj(f_l)|^2
    std::pair<std::size_t, std::size_t> genie_beam_pair(const CMat &G_e, const BeamGrid &gridA, const BeamGrid &gridB);

    // Same stage structure as the digital protocols, with analog grid beams at both ends.
    // The first receiver picks its beam from the unbeamformed pilot; the other end then picks its
    // beam from a pilot sent on the conjugate of that beam.
    // Estimator::pcsi selects the beam pair from the true effective channel.
    PhaseTrace run_fgb_phase_protocol(ApState &apA, ApState &apB, const ChannelRealization &ch,
                                      const PhaseKnobs &knobs, Rng &rng);

    FreqTrace run_fgb_freq_protocol(ApState &apA, ApState &apB, const ChannelRealization &ch, const FreqKnobs &knobs,
                                    Rng &rng);
}

#endif
