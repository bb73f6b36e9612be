#include "tunnelwatch/detection.hpp"

namespace tw {

std::string_view to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::Car:
      return "Car";
    case ObjectClass::Person:
      return "Person";
    case ObjectClass::Fire:
      return "Fire";
    case ObjectClass::NoFire:
      return "NoFire";
  }
  return "Car";
}

std::optional<ObjectClass> object_class_from_string(std::string_view s) {
  if (s == "Car") return ObjectClass::Car;
  if (s == "Person") return ObjectClass::Person;
  if (s == "Fire") return ObjectClass::Fire;
  if (s == "NoFire") return ObjectClass::NoFire;
  return std::nullopt;
}

}  // namespace tw
