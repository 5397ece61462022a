// Copyright 2026 The GCL-LRR Authors.
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

#pragma once

#include "gcllrr/bound.hpp"
#include "gcllrr/bundle_io.hpp"
#include "gcllrr/classifier.hpp"
#include "gcllrr/encoder.hpp"
#include "gcllrr/errors.hpp"
#include "gcllrr/experiment.hpp"
#include "gcllrr/graph.hpp"
#include "gcllrr/kmeans.hpp"
#include "gcllrr/matrix.hpp"
#include "gcllrr/noise.hpp"
#include "gcllrr/rng.hpp"
#include "gcllrr/sbm.hpp"
#include "gcllrr/spectral.hpp"
#include "gcllrr/text_io.hpp"
