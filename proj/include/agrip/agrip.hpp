// Copyright 2026 The agrip Authors.
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

#include "agrip/constructions.hpp"
#include "agrip/design.hpp"
#include "agrip/error.hpp"
#include "agrip/finite_field.hpp"
#include "agrip/geometry.hpp"
#include "agrip/incidence.hpp"
#include "agrip/matrix_core.hpp"
#include "agrip/rational.hpp"
#include "agrip/recovery.hpp"
#include "agrip/sign_schemes.hpp"
#include "agrip/verification.hpp"
