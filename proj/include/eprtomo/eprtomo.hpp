// Copyright 2026 The eprtomo Authors
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

#include "eprtomo/acquisition.hpp"
#include "eprtomo/conditioning.hpp"
#include "eprtomo/config.hpp"
#include "eprtomo/criteria.hpp"
#include "eprtomo/errors.hpp"
#include "eprtomo/fock.hpp"
#include "eprtomo/gaussian.hpp"
#include "eprtomo/record.hpp"
#include "eprtomo/rng.hpp"
#include "eprtomo/svg.hpp"
#include "eprtomo/text.hpp"
#include "eprtomo/tomography.hpp"
