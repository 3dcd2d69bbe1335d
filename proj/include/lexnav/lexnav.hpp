// Copyright 2026 The lexnav Authors
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

#pragma once

#include "lexnav/embedding.hpp"
#include "lexnav/error.hpp"
#include "lexnav/gridworld.hpp"
#include "lexnav/harness/config.hpp"
#include "lexnav/harness/metrics.hpp"
#include "lexnav/harness/plot.hpp"
#include "lexnav/harness/runner.hpp"
#include "lexnav/nn.hpp"
#include "lexnav/qlearn.hpp"
#include "lexnav/rng.hpp"
#include "lexnav/transfer.hpp"
