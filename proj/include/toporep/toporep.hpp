#pragma once

#include "toporep/bootstrap.hpp"
#include "toporep/brute_force.hpp"
#include "toporep/cluster.hpp"
#include "toporep/diagram.hpp"
#include "toporep/diagram_distance.hpp"
#include "toporep/features.hpp"
#include "toporep/image.hpp"
#include "toporep/io.hpp"
#include "toporep/metrics.hpp"
#include "toporep/pipeline.hpp"
#include "toporep/rank_oracle.hpp"
#include "toporep/rng.hpp"
#include "toporep/synth.hpp"
#include "toporep/types.hpp"
#include "toporep/version.hpp"
#include "toporep/vr.hpp"
