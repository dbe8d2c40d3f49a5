#pragma once

#include "ild/error.hpp"
#include "ild/csv.hpp"
#include "ild/random.hpp"
#include "ild/dataio.hpp"
#include "ild/bucketizer.hpp"
#include "ild/roc.hpp"
#include "ild/core.hpp"
#include "ild/naive_bayes.hpp"
#include "ild/experiment.hpp"
