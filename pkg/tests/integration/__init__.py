"""
Pruebas de integración del sistema
"""
