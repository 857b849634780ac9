"""
Inferencia de interacciones gen-gen intra- e inter-celulares en datos
espaciales y generación de campos de expresión contrafactuales.
"""
__version__ = '1.1.0'
