#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "authscan/api_model.hpp"
#include "authscan/http_engine.hpp"
#include "authscan/random_source.hpp"

namespace authscan {

enum class ValueSource { Request, Response };

struct ObservedValue {
  nlohmann::json value;
  ValueSource source = ValueSource::Request;
  std::int64_t timestamp_ms = 0;
};

// Values seen in earlier HTTP interactions, keyed by normalized parameter
// name. Append-only during a scenario run; lookups never mutate.
class ObservedDictionary {
 public:
  void record(std::string_view raw_name, nlohmann::json value,
              ValueSource source, std::int64_t timestamp_ms);

  // Most recently appended entry under the normalized name, or nullptr.
  const ObservedValue* most_recent(std::string_view raw_name) const;

  std::size_t entry_count() const;

 private:
  std::map<std::string, std::vector<ObservedValue>> entries_;
};

// Value for a parameter, by fixed priority: documented examples, enum
// values, default, most recent dictionary match, random fallback of the
// correct type/format. Never fails.
nlohmann::json provide_value(const ApiParameter& param,
                             const ObservedDictionary& dictionary,
                             RandomSource& rng);

// Appends every leaf field of the request (query string and JSON body) and,
// when the response status is 2xx, of the response body.
void record_interaction(ObservedDictionary& dictionary,
                        const HttpInteraction& interaction);

}  // namespace authscan
