/*
   Copyright 2026 The rwre Authors

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

#include "rwre/continuum.hpp"
#include "rwre/env.hpp"
#include "rwre/io.hpp"
#include "rwre/linalg.hpp"
#include "rwre/network.hpp"
#include "rwre/parallel.hpp"
#include "rwre/particles.hpp"
#include "rwre/rng.hpp"
#include "rwre/stats.hpp"
#include "rwre/verify.hpp"
#include "rwre/walk.hpp"
