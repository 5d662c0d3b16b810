#pragma once

#include "bnpsketch/dp_estim.hpp"
#include "bnpsketch/errors.hpp"
#include "bnpsketch/experiment.hpp"
#include "bnpsketch/genmodel.hpp"
#include "bnpsketch/numkit.hpp"
#include "bnpsketch/oracle.hpp"
#include "bnpsketch/pyp_estim.hpp"
#include "bnpsketch/random.hpp"
#include "bnpsketch/report.hpp"
#include "bnpsketch/sketch.hpp"
#include "bnpsketch/tokenize.hpp"
