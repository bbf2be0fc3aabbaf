#!/usr/bin/env python3
"""Flatten CityGML LoD2 building models to the GeoJSON consumed by floorcast.

Extracts one feature per building: the largest ground-surface ring as the
exterior polygon, plus the attributes floorcast reads (floors, height_m,
roof_type, function). Input coordinates are expected in lon/lat order; pass
--swap-axes for files stored lat/lon.

Usage:
    citygml_to_geojson.py input.gml [input2.gml ...] -o footprints.geojson
"""

import argparse
import json
import sys
import xml.etree.ElementTree as ET

NS = {
    "gml": "http://www.opengis.net/gml",
    "bldg": "http://www.opengis.net/citygml/building/2.0",
    "gen": "http://www.opengis.net/citygml/generics/2.0",
}

# Signed roofType codes (AdV codelist): 1000 = flat, everything else pitched.
FLAT_ROOF_CODES = {"1000"}

RESIDENTIAL_CODES = {"31001_1000", "1000", "31001_1010", "1010", "1020", "1120"}
COMMERCIAL_CODES = {"31001_2000", "2000", "2010", "2020", "2050", "2460"}


def ring_coords(pos_list_text, swap):
    vals = [float(v) for v in pos_list_text.split()]
    # posList is x y z triplets for LoD2 surfaces
    dim = 3 if len(vals) % 3 == 0 else 2
    pts = []
    for i in range(0, len(vals) - dim + 1, dim):
        x, y = vals[i], vals[i + 1]
        pts.append([y, x] if swap else [x, y])
    return pts


def ring_area(pts):
    s = 0.0
    for i in range(len(pts)):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % len(pts)]
        s += x1 * y2 - x2 * y1
    return abs(s) / 2.0


def generic_attributes(building):
    attrs = {}
    for attr in building.findall(".//gen:stringAttribute", NS):
        name = attr.get("name")
        value = attr.find("gen:value", NS)
        if name and value is not None:
            attrs[name] = value.text
    for attr in building.findall(".//gen:intAttribute", NS):
        name = attr.get("name")
        value = attr.find("gen:value", NS)
        if name and value is not None:
            attrs[name] = value.text
    return attrs


def building_to_feature(building, index, swap):
    rings = []
    for ground in building.findall(".//bldg:GroundSurface", NS):
        for pos_list in ground.findall(".//gml:posList", NS):
            if pos_list.text:
                rings.append(ring_coords(pos_list.text, swap))
    if not rings:
        # LoD0 footprint fallback
        for pos_list in building.findall(".//bldg:lod0FootPrint//gml:posList", NS):
            if pos_list.text:
                rings.append(ring_coords(pos_list.text, swap))
    if not rings:
        return None
    exterior = max(rings, key=ring_area)

    props = {}
    storeys = building.find("bldg:storeysAboveGround", NS)
    if storeys is not None and storeys.text:
        props["floors"] = int(float(storeys.text))
    height = building.find("bldg:measuredHeight", NS)
    if height is not None and height.text:
        props["height_m"] = float(height.text)

    roof = building.find("bldg:roofType", NS)
    if roof is not None and roof.text:
        props["roof_type"] = "flat" if roof.text.strip() in FLAT_ROOF_CODES else "nonflat"

    function = building.find("bldg:function", NS)
    code = function.text.strip() if function is not None and function.text else None
    if code in RESIDENTIAL_CODES:
        props["function"] = "residential"
    elif code in COMMERCIAL_CODES:
        props["function"] = "commercial"
    elif code:
        props["function"] = "other"

    gml_id = building.get("{http://www.opengis.net/gml}id") or f"building_{index}"
    return {
        "type": "Feature",
        "id": gml_id,
        "properties": props,
        "geometry": {"type": "Polygon", "coordinates": [exterior]},
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("inputs", nargs="+", help="CityGML files")
    ap.add_argument("-o", "--output", required=True, help="output GeoJSON path")
    ap.add_argument("--swap-axes", action="store_true",
                    help="input posList is lat/lon (or northing/easting)")
    args = ap.parse_args()

    features = []
    skipped = 0
    for path in args.inputs:
        tree = ET.parse(path)
        for building in tree.iter("{http://www.opengis.net/citygml/building/2.0}Building"):
            feature = building_to_feature(building, len(features), args.swap_axes)
            if feature is None:
                skipped += 1
            else:
                features.append(feature)

    with open(args.output, "w", encoding="utf-8") as f:
        json.dump({"type": "FeatureCollection", "features": features}, f)
        f.write("\n")
    print(f"{len(features)} footprints written, {skipped} buildings without a ground surface",
          file=sys.stderr)


if __name__ == "__main__":
    main()
