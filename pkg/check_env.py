# -*- coding: utf-8 -*-
import importlib
import sys

REQUIRED = [
    ("sympy", "sympy"),
    ("numpy", "numpy"),
    ("tqdm", "tqdm"),
    ("matplotlib", "matplotlib"),
]


def check_imports():
    print("Verifying environment for sapers...")
    print("-" * 40)

    missing_packages = []

    for module_name, package in REQUIRED:
        try:
            module = importlib.import_module(module_name)
            print(f"✅ {package} found: {getattr(module, '__version__', 'unknown version')}")
        except ImportError:
            missing_packages.append(package)
            print(f"❌ {package} NOT found")
        except Exception as e:
            missing_packages.append(f"{package} (Error: {e})")
            print(f"❌ {package} error: {e}")

    # Exact arithmetic over GF(p) needs sympy's finite-field domains
    try:
        from sympy.polys.domains import GF
        GF(5, symmetric=False)
    except Exception as e:
        missing_packages.append(f"sympy GF domains (Error: {e})")
        print(f"❌ sympy GF(p) domains unavailable: {e}")

    print("-" * 40)

    if missing_packages:
        print("⚠️  Missing or broken packages detected:")
        for pkg in missing_packages:
            print(f"   - {pkg}")
        print("\nPlease install the required dependencies by running:")
        print("   pip install -r requirements.txt")
        sys.exit(1)
    else:
        print("🎉 Environment verified! Ready to run sapers.")
        sys.exit(0)


if __name__ == "__main__":
    check_imports()
