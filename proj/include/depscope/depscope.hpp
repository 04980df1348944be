#pragma once

// Convenience umbrella: the whole bead-watching stack in one include.

#include "depscope/cli.hpp"
#include "depscope/config.hpp"
#include "depscope/control.hpp"
#include "depscope/frame.hpp"
#include "depscope/geometry.hpp"
#include "depscope/io.hpp"
#include "depscope/render.hpp"
#include "depscope/rng.hpp"
#include "depscope/siggen.hpp"
#include "depscope/testbed.hpp"
#include "depscope/trend.hpp"
#include "depscope/vision.hpp"
