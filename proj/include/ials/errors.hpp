// Copyright 2026 The iALS Authors.
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ials {

// Errors the CLI maps to exit code 2 (bad input) derive from InputError;
// everything else is a runtime failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : InputError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class EmptyDataset : public InputError {
public:
    using InputError::InputError;
};

class InsufficientUsers : public InputError {
public:
    using InputError::InputError;
};

class UserTooSparse : public InputError {
public:
    UserTooSparse(std::vector<std::size_t> users)
        : InputError(describe(users)), users_(std::move(users)) {}

    const std::vector<std::size_t>& users() const { return users_; }

private:
    static std::string describe(const std::vector<std::size_t>& users) {
        std::string msg = "users with fewer than 2 interactions:";
        std::size_t shown = 0;
        for (auto u : users) {
            if (shown++ == 20) {
                msg += " ...";
                break;
            }
            msg += " " + std::to_string(u);
        }
        return msg;
    }

    std::vector<std::size_t> users_;
};

class EmptyRelevantSet : public Error {
public:
    EmptyRelevantSet() : Error("relevant item set is empty") {}
};

class DimensionMismatch : public InputError {
public:
    using InputError::InputError;
};

}  // namespace ials
