// Copyright 2026 The wignerlab Authors
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


/// @file
/// Everything except the command-line front end.

#pragma once

#include "wignerlab/amplitude.hpp"
#include "wignerlab/errors.hpp"
#include "wignerlab/evaluate.hpp"
#include "wignerlab/frlab.hpp"
#include "wignerlab/interference.hpp"
#include "wignerlab/measure.hpp"
#include "wignerlab/qcore.hpp"
#include "wignerlab/render.hpp"
#include "wignerlab/rng.hpp"
#include "wignerlab/scenario.hpp"
#include "wignerlab/scenario_io.hpp"
