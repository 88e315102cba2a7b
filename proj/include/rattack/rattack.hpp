#pragma once

#include "rattack/core.hpp"
#include "rattack/network.hpp"
#include "rattack/flow.hpp"
#include "rattack/simplex.hpp"
#include "rattack/flow_lp.hpp"
#include "rattack/min_lambda.hpp"
#include "rattack/single_hop.hpp"
#include "rattack/max_loss.hpp"
#include "rattack/node_select.hpp"
#include "rattack/generators.hpp"
#include "rattack/json_io.hpp"
#include "rattack/toml.hpp"
#include "rattack/sweep.hpp"
