#pragma once

#include "latmove/dataset.hpp"
#include "latmove/detector.hpp"
#include "latmove/estimator.hpp"
#include "latmove/experiment.hpp"
#include "latmove/ingest.hpp"
#include "latmove/likelihood.hpp"
#include "latmove/model.hpp"
#include "latmove/parallel.hpp"
#include "latmove/rng.hpp"
#include "latmove/roc.hpp"
#include "latmove/schedule.hpp"
#include "latmove/simulator.hpp"
#include "latmove/topology.hpp"
#include "latmove/trace.hpp"
