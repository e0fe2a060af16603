// Copyright 2026 The Gamaka Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GAMAKA_GAMAKA_HPP
#define GAMAKA_GAMAKA_HPP

#include <gamaka/analysis.hpp>
#include <gamaka/audio_io.hpp>
#include <gamaka/error.hpp>
#include <gamaka/formats.hpp>
#include <gamaka/pipeline.hpp>
#include <gamaka/pitch_tracking.hpp>
#include <gamaka/segmentation.hpp>
#include <gamaka/spectrum.hpp>
#include <gamaka/timescale.hpp>

#endif
