// Copyright 2026 The fmqa Authors
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

#include "fmqa/bits.hpp"
#include "fmqa/dataset.hpp"
#include "fmqa/encoding.hpp"
#include "fmqa/eval.hpp"
#include "fmqa/fm.hpp"
#include "fmqa/io.hpp"
#include "fmqa/pipeline.hpp"
#include "fmqa/qubo.hpp"
#include "fmqa/solvers.hpp"
#include "fmqa/synth.hpp"
