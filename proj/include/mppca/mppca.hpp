// Copyright 2026 The mppca Authors
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

#ifndef MPPCA_MPPCA_HPP
#define MPPCA_MPPCA_HPP

#include <mppca/core.hpp>
#include <mppca/data_io.hpp>
#include <mppca/dataset.hpp>
#include <mppca/incomplete.hpp>
#include <mppca/mixture.hpp>
#include <mppca/monitoring.hpp>
#include <mppca/pipeline.hpp>
#include <mppca/ppca.hpp>
#include <mppca/random.hpp>
#include <mppca/report.hpp>
#include <mppca/synth.hpp>

#endif  // MPPCA_MPPCA_HPP
