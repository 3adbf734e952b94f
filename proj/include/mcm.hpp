// Copyright 2026 The MCM Codec Authors. All Rights Reserved.
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

// Umbrella header for the masked-patch image codec.

#pragma once

#include "mcm/basis_io.hpp"
#include "mcm/bitio.hpp"
#include "mcm/codec.hpp"
#include "mcm/damask.hpp"
#include "mcm/error.hpp"
#include "mcm/evaluate.hpp"
#include "mcm/huffman.hpp"
#include "mcm/image.hpp"
#include "mcm/inpaint.hpp"
#include "mcm/latent.hpp"
#include "mcm/metrics.hpp"
#include "mcm/netpbm.hpp"
#include "mcm/position_record.hpp"
#include "mcm/range_coder.hpp"
#include "mcm/synth.hpp"
