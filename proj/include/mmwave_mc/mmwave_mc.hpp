// SPDX-License-Identifier: Apache-2.0
//
// mmwave-mc: matrix-completion channel estimation for hybrid mmWave MIMO
// Copyright (C) 2026 The mmwave-mc Authors
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


#ifndef MMWAVE_MC_MMWAVE_MC_HPP
#define MMWAVE_MC_MMWAVE_MC_HPP

#include "channel.hpp"
#include "channel_io.hpp"
#include "frontend.hpp"
#include "gcg_alt.hpp"
#include "harness.hpp"
#include "imc.hpp"
#include "metrics.hpp"
#include "omp.hpp"

#endif
