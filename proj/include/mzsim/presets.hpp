// Copyright 2026 The mzsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Bundled scenario documents, one per figure panel.

#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <utility>

namespace mzsim {

namespace presets {

inline constexpr std::string_view kDl1_0 = R"(# Two-photon fringes, dL1 = 0.
[source]
kind = entangled
[delays]
delta_L1 = 0 um
[detection]
v_floor = 0.945
coupling = 1
[rates]
pair_rate = 20000 /s
integration_time = 1 s
)";

inline constexpr std::string_view kDl1_200 = R"(# Two-photon fringes, dL1 = 200 um.
[source]
kind = entangled
[delays]
delta_L1 = 200 um
[detection]
v_floor = 0.945
coupling = 1
[rates]
pair_rate = 20000 /s
integration_time = 1 s
)";

inline constexpr std::string_view kDl1_1000 = R"(# Two-photon fringes, dL1 = 1000 um.
[source]
kind = entangled
[delays]
delta_L1 = 1000 um
[detection]
v_floor = 0.945
coupling = 1
[rates]
pair_rate = 20000 /s
integration_time = 1 s
)";

inline constexpr std::string_view kDl1_10000 = R"(# Two-photon fringes, dL1 = 10000 um, beyond the fiber Rayleigh range.
[source]
kind = entangled
[delays]
delta_L1 = 10000 um
[detection]
v_floor = 0.945
coupling = 0.6
[rates]
pair_rate = 20000 /s
integration_time = 1 s
)";

inline constexpr std::string_view kSinglePhoton = R"(# Single +45 photon through the interferometer.
[source]
kind = single_photon
polarizer_angle = 45 deg
[spectral]
enabled = false
[rates]
pair_rate = 20000 /s
integration_time = 1 s
)";

inline constexpr std::string_view kHom = R"(# HOM dip versus dL1.
[source]
kind = entangled
[spectral]
xi_single = 126 um
[detection]
v_floor = 0.945
[grid]
start = -400 um
stop = 400 um
step = 5 um
)";

inline constexpr std::string_view kEnvelopeSingle = R"(# Single-photon interference envelope.
[source]
kind = single_photon
[spectral]
xi_single = 130 um
[grid]
start = -400 um
stop = 400 um
step = 5 um
)";

inline constexpr std::string_view kEnvelopePair = R"(# Two-photon interference envelope.
[source]
kind = entangled
[spectral]
xi_pump = 300 um
[delays]
delta_L1 = 0 um
[grid]
start = -400 um
stop = 400 um
step = 5 um
)";

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 8> kAll = {{
    {"paper_dl1_0", kDl1_0},
    {"paper_dl1_200", kDl1_200},
    {"paper_dl1_1000", kDl1_1000},
    {"paper_dl1_10000", kDl1_10000},
    {"paper_single_photon", kSinglePhoton},
    {"paper_hom", kHom},
    {"paper_envelope_single", kEnvelopeSingle},
    {"paper_envelope_pair", kEnvelopePair},
}};

}  // namespace presets

inline std::optional<std::string_view> find_preset(std::string_view name) {
  for (const auto& [key, text] : presets::kAll)
    if (key == name) return text;
  return std::nullopt;
}

}  // namespace mzsim
