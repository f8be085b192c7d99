#pragma once

#include <nlohmann/json.hpp>

#include "tsv/exchange.hpp"

namespace tsv::detail {

/// JSON tree forms of the exchange document, used when embedding it in a
/// service reply.
nlohmann::json exchange_to_json(const ExchangeDocument& doc);
ExchangeDocument exchange_from_json(const nlohmann::json& j);

}  // namespace tsv::detail
