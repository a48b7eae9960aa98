#pragma once

// JSON bindings shared by the params and scenario loaders.

#include <json.hpp>

#include "amflat/params.hpp"

namespace amflat {

AMParams params_from_json(const nlohmann::json& j);

}  // namespace amflat
