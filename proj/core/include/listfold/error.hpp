/*
 * Copyright 2026 The ListFold Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LISTFOLD_ERROR_HPP_
#define LISTFOLD_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace listfold {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad CSV cells, wrong argument shapes, invalid options.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Data problems: unreadable files, duplicate cells, empty universes.
class DataError : public Error {
 public:
  using Error::Error;
};

// A CSV cell that failed to parse. `row` is 1-based and counts the header.
class ParseError : public DataError {
 public:
  ParseError(const std::string& path, std::size_t row, const std::string& what)
      : DataError(path + ":" + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Training produced non-finite losses for too many consecutive batches.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace listfold

#endif  // LISTFOLD_ERROR_HPP_
