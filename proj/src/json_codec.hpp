#pragma once

// Internal JSON encoders shared by the persistence layer and the gateway.

#include "json.hpp"
#include "tlsgate/events.hpp"
#include "tlsgate/whitelist.hpp"

namespace tlsgate::detail {

nlohmann::ordered_json entry_to_json(const DomainEntry& entry);
nlohmann::ordered_json event_to_json(const WarningEvent& event);

}  // namespace tlsgate::detail
