#pragma once

#include <string>

#ifndef SFQSIM_DATA_DIR
#error "SFQSIM_DATA_DIR must point at the data directory"
#endif

inline std::string data_path(const std::string& rel) { return std::string(SFQSIM_DATA_DIR) + "/" + rel; }
inline std::string netlist_path(const std::string& name) { return data_path("netlists/" + name); }
inline std::string schedule_path(const std::string& name) { return data_path("schedules/" + name); }
