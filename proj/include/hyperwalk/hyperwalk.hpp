/*
   Copyright 2026 The hyperwalk Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include "hyperwalk/error.hpp"
#include "hyperwalk/model.hpp"
#include "hyperwalk/stats.hpp"
#include "hyperwalk/parallel.hpp"
#include "hyperwalk/linalg2.hpp"
#include "hyperwalk/spectrum.hpp"
#include "hyperwalk/transferwalk.hpp"
#include "hyperwalk/prufer.hpp"
#include "hyperwalk/backtrack.hpp"
#include "hyperwalk/martingale.hpp"
#include "hyperwalk/idsestimate.hpp"
