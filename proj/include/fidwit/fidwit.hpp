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

#pragma once

#include "fidwit/core.hpp"
#include "fidwit/estimator.hpp"
#include "fidwit/grav.hpp"
#include "fidwit/pauli.hpp"
#include "fidwit/scan.hpp"
#include "fidwit/state.hpp"
#include "fidwit/trig_min.hpp"
#include "fidwit/witness.hpp"
