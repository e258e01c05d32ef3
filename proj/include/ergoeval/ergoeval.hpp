/* Copyright 2026 The ergoeval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Umbrella header for the ergoeval toolkit.

#pragma once

#include "ergoeval/csv.hpp"
#include "ergoeval/dataset.hpp"
#include "ergoeval/error.hpp"
#include "ergoeval/evaluation.hpp"
#include "ergoeval/meteor.hpp"
#include "ergoeval/metrics.hpp"
#include "ergoeval/model_client.hpp"
#include "ergoeval/parallel.hpp"
#include "ergoeval/porter_stemmer.hpp"
#include "ergoeval/random.hpp"
#include "ergoeval/report.hpp"
#include "ergoeval/riskmodel.hpp"
#include "ergoeval/spice_lite.hpp"
#include "ergoeval/survey.hpp"
#include "ergoeval/textproc.hpp"
