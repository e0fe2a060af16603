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

#ifndef GAMAKA_ERROR_HPP
#define GAMAKA_ERROR_HPP

#include <stdexcept>

namespace gamaka
{

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct OutOfRange : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// WAV decoding failures are split so callers can tell a bad encoding from a cut-off file.
struct UnsupportedWav : Error {
    using Error::Error;
};

struct TruncatedWav : Error {
    using Error::Error;
};

} // namespace gamaka

#endif
