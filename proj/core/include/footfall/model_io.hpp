#pragma once

// FSN1 text format. A network block is
//
//   FSN1 <role> <n_layers>
//   dims <in> <out>
//   <out rows of in weights, row-major>
//   <out bias values>
//   ... one dims section per layer ...
//   gamma <v>
//   fdist <v>
//   bounds <dx_fwd> <dx_bwd> <dy> <dtheta>
//
// optionally followed by `robot <foot_length> <foot_width>`,
// `reward <w1> <w2> <w3>`, `tolerance <tol_p> <tol_theta> <truncation>` and
// `leaky <slope>`. Roles: actor (tanh head), critic1, critic2 (identity
// head). A model file is the actor, critic1 and critic2 blocks in order.
// Numbers are written in shortest round-trip form.

#include <filesystem>
#include <string>
#include <string_view>

#include "footfall/model.hpp"

namespace footfall {

std::string format_network(std::string_view role, const Mlp& net, const TrainedModel& meta);
std::string format_model(const TrainedModel& model);

/// Throws ParseError naming the offending line.
TrainedModel parse_model(std::string_view text, const std::string& source = "<model>");

TrainedModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const TrainedModel& model);

}  // namespace footfall
