// Copyright 2026 The nscsg Authors
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

#include "nscsg/benchmarks.hpp"
#include "nscsg/cli.hpp"
#include "nscsg/error.hpp"
#include "nscsg/fsi.hpp"
#include "nscsg/gbi.hpp"
#include "nscsg/io.hpp"
#include "nscsg/lp.hpp"
#include "nscsg/model.hpp"
#include "nscsg/nfg.hpp"
#include "nscsg/nn.hpp"
#include "nscsg/parallel.hpp"
#include "nscsg/speprog.hpp"
#include "nscsg/unfold.hpp"
#include "nscsg/verify.hpp"
