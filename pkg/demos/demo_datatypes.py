#!/usr/bin/env python3
"""The datatype layer: schemas, values, downcasting, hashing."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from langcc import datacc as D

SRC = """
data Color { Red; Green; Blue; }

data Shape {
    Circle { r: integer; fill: Color; }
    Poly { points: [integer]; label: string?; }
}
"""

if __name__ == "__main__":
    schema = D.parse_data_spec(SRC)
    print(D.schema_render(schema))

    circle = D.make_value(schema, "Shape::Circle",
                          {"r": 3, "fill": D.make_value(schema, "Color::Red", {})})
    print("value: ", D.debug_print(circle))
    print("as Shape? ", D.downcast(schema, circle, "Shape") is circle)
    print("as Poly?  ", D.downcast(schema, circle, "Shape::Poly"))

    bigger = D.substitute_field(schema, circle, "r", 4)
    print("updated:", D.debug_print(bigger), "| original:", D.debug_print(circle))

    print("hash:    ", D.value_hash(circle).hex()[:16], "...")
    print("rehash equal:", D.value_hash(circle) == D.value_hash(
        D.make_value(schema, "Shape::Circle",
                     {"r": 3, "fill": D.make_value(schema, "Color::Red", {})})))
    n0 = D.hash_computation_count()
    D.value_hash(circle)
    print("cached:  ", D.hash_computation_count() == n0)
